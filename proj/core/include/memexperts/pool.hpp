#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "memexperts/random.hpp"
#include "memexperts/types.hpp"

namespace memexperts {

// All buckets of one hierarchy plus the external weight pairs.
struct PoolState {
  std::vector<Bucket> buckets;
  LevelWeights weights;

  static PoolState empty(const HierarchyConfig& config);

  std::size_t entry_count() const noexcept;
};

// Supplies the expert placed into each sampling slot.
class ExpertSource {
 public:
  virtual ~ExpertSource() = default;
  virtual ExpertId draw(int level, const ArrivalStamp& stamp) = 0;
};

// Uniform with replacement over [0, n).
class UniformExpertSource final : public ExpertSource {
 public:
  UniformExpertSource(std::size_t n, Rng& rng) : n_(n), rng_(rng) {}
  ExpertId draw(int level, const ArrivalStamp& stamp) override;

 private:
  std::size_t n_;
  Rng& rng_;
};

// Replays a recorded trace in order; any (level, stamp) mismatch throws
// ContractViolation.
class TraceReplaySource final : public ExpertSource {
 public:
  explicit TraceReplaySource(const SamplingTrace& trace) : trace_(trace) {}
  ExpertId draw(int level, const ArrivalStamp& stamp) override;

  std::size_t consumed() const noexcept { return next_; }

 private:
  const SamplingTrace& trace_;
  std::size_t next_ = 0;
};

// Earlier arrival and loss within a (1 + epsilon) factor of the target's.
bool dominates(const PoolEntry& candidate, const PoolEntry& target, double epsilon);

// k' = the largest level whose block size divides t.
int top_touched_level(const HierarchyConfig& config, Day t);

// tau = the most recent multiple of T_{k'+1} at or before t.
Day enclosing_block_start(const HierarchyConfig& config, Day t, int top_level);

// Removes every entry at or after `boundary` that some entry of the
// pre-eviction bucket dominates. Entries before the boundary always stay.
// Returns the number removed.
std::size_t evict_dominated(Bucket& bucket, const ArrivalStamp& boundary, double epsilon);

// Survivors at or after the boundary.
std::size_t post_eviction_bound_check(const Bucket& bucket, const ArrivalStamp& boundary);

// ln(T) / ln(1 + eps) + 1: the chain bound on up-for-eviction survivors.
double survivor_bound(const HierarchyConfig& config);

struct LevelUpdate {
  int level = 0;
  std::size_t before = 0;
  std::size_t evicted = 0;
  std::size_t survivors_after_boundary = 0;
  std::size_t forwarded_in = 0;
  std::size_t sampled = 0;
};

struct BucketUpdateReport {
  Day t = 0;
  int top_level = 0;
  Day tau = 0;
  ArrivalStamp boundary;
  std::vector<LevelUpdate> levels;
};

struct UpdateHooks {
  // Called for each touched level with the bucket as it was before eviction.
  std::function<void(int level, const Bucket& before, const ArrivalStamp& boundary)>
      before_eviction;
};

// Block-boundary maintenance at day t (t a multiple of T_0; t = 0 initializes):
// evict, reset weights, forward survivors upward, then sample m fresh experts
// into every touched level. Samples are appended to `trace` when given.
BucketUpdateReport update_buckets(PoolState& pools, const HierarchyConfig& config, Day t,
                                  ExpertSource& source, SamplingTrace* trace = nullptr,
                                  const UpdateHooks* hooks = nullptr);

// Adds day losses to every entry's loss_since_arrival without touching weights.
template <class LossOf>
void accumulate_losses(PoolState& pools, LossOf&& loss_of) {
  for (Bucket& bucket : pools.buckets)
    for (PoolEntry& entry : bucket.entries) entry.loss_since_arrival += loss_of(entry.expert);
}

}  // namespace memexperts
