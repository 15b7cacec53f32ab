#include "memexperts/pool.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memexperts/errors.hpp"

namespace memexperts {

PoolState PoolState::empty(const HierarchyConfig& config) {
  PoolState pools;
  pools.buckets.resize(static_cast<std::size_t>(config.levels()));
  for (int i = 0; i < config.levels(); ++i) pools.buckets[static_cast<std::size_t>(i)].level = i;
  pools.weights.pairs.resize(static_cast<std::size_t>(config.levels() - 1));
  return pools;
}

std::size_t PoolState::entry_count() const noexcept {
  std::size_t total = 0;
  for (const Bucket& b : buckets) total += b.size();
  return total;
}

ExpertId UniformExpertSource::draw(int, const ArrivalStamp&) {
  return ExpertId{static_cast<std::uint32_t>(rng_.below(n_))};
}

ExpertId TraceReplaySource::draw(int level, const ArrivalStamp& stamp) {
  if (next_ >= trace_.size()) throw ContractViolation("sampling trace exhausted");
  const SampleRecord& rec = trace_[next_++];
  if (rec.level != level || rec.stamp != stamp)
    throw ContractViolation("sampling trace mismatch at record " + std::to_string(next_ - 1) +
                            ": expected level " + std::to_string(level) + " stamp " +
                            to_string(stamp) + ", trace has level " +
                            std::to_string(rec.level) + " stamp " + to_string(rec.stamp));
  return rec.expert;
}

bool dominates(const PoolEntry& candidate, const PoolEntry& target, double epsilon) {
  return candidate.arrival < target.arrival &&
         candidate.loss_since_arrival <= (1.0 + epsilon) * target.loss_since_arrival;
}

int top_touched_level(const HierarchyConfig& config, Day t) {
  if (t < 0 || t % config.block_size(0) != 0)
    throw ContractViolation("bucket update at day " + std::to_string(t) +
                            " is not on a T_0 boundary");
  int top = 0;
  for (int i = 1; i < config.levels(); ++i)
    if (t % config.block_size(i) == 0) top = i;
  return top;
}

Day enclosing_block_start(const HierarchyConfig& config, Day t, int top_level) {
  const Day outer = config.block_size(top_level + 1);
  return (t / outer) * outer;
}

std::size_t evict_dominated(Bucket& bucket, const ArrivalStamp& boundary, double epsilon) {
  // Entries are sorted by arrival, so "some earlier entry dominates e" is the
  // same as "the smallest loss seen before e is within (1+eps) of e's loss".
  // The running minimum covers the whole pre-eviction bucket, evicted or not.
  auto& entries = bucket.entries;
  std::vector<PoolEntry> kept;
  kept.reserve(entries.size());
  double earlier_min = INFINITY;
  for (const PoolEntry& entry : entries) {
    const bool up = entry.arrival >= boundary;
    const bool dominated = earlier_min <= (1.0 + epsilon) * entry.loss_since_arrival;
    if (!(up && dominated)) kept.push_back(entry);
    earlier_min = std::min(earlier_min, entry.loss_since_arrival);
  }
  const std::size_t removed = entries.size() - kept.size();
  entries = std::move(kept);
  return removed;
}

std::size_t post_eviction_bound_check(const Bucket& bucket, const ArrivalStamp& boundary) {
  return static_cast<std::size_t>(
      std::count_if(bucket.entries.begin(), bucket.entries.end(),
                    [&](const PoolEntry& e) { return e.arrival >= boundary; }));
}

double survivor_bound(const HierarchyConfig& config) {
  return std::log(static_cast<double>(config.horizon())) / std::log1p(config.epsilon()) + 1.0;
}

BucketUpdateReport update_buckets(PoolState& pools, const HierarchyConfig& config, Day t,
                                  ExpertSource& source, SamplingTrace* trace,
                                  const UpdateHooks* hooks) {
  if (pools.buckets.size() != static_cast<std::size_t>(config.levels()))
    throw ContractViolation("pool has the wrong number of buckets");
  if (t > config.horizon()) throw ContractViolation("bucket update past the horizon");

  BucketUpdateReport report;
  report.t = t;
  report.top_level = top_touched_level(config, t);
  report.tau = enclosing_block_start(config, t, report.top_level);
  report.boundary = eviction_boundary(report.tau);
  const Day protected_until = report.tau + config.block_size(report.top_level + 1);
  const auto top = static_cast<std::size_t>(report.top_level);

  for (std::size_t i = 0; i <= top; ++i) {
    Bucket& bucket = pools.buckets[i];
    if (!bucket.empty() && bucket.entries.back().arrival.day >= t)
      throw ContractViolation("bucket " + std::to_string(i) + " already updated at day " +
                              std::to_string(t));
    if (hooks && hooks->before_eviction)
      hooks->before_eviction(static_cast<int>(i), bucket, report.boundary);

    LevelUpdate level;
    level.level = static_cast<int>(i);
    level.before = bucket.size();
    level.evicted = evict_dominated(bucket, report.boundary, config.epsilon());
    for (PoolEntry& entry : bucket.entries) {
      entry.log_weight = 0.0;
      if (entry.arrival < report.boundary)
        entry.protected_until = protected_until;
      else
        entry.protected_until.reset();
    }
    level.survivors_after_boundary = post_eviction_bound_check(bucket, report.boundary);
    if (i + 1 < pools.buckets.size()) pools.weights.reset(i);
    report.levels.push_back(level);
  }

  // Copies come from post-eviction pools only; going top-down means no level
  // has received this round's forwards before it is copied from.
  for (std::size_t i = top; i >= 1; --i) {
    std::vector<PoolEntry> copies;
    std::uint32_t seq = 0;
    for (std::size_t j = 0; j < i; ++j)
      for (const PoolEntry& src : pools.buckets[j].entries)
        copies.push_back(PoolEntry{src.expert, ArrivalStamp{t, Phase::Forwarded, seq++}, 0.0, 0.0,
                                   std::nullopt});
    auto& dst = pools.buckets[i].entries;
    report.levels[i].forwarded_in = copies.size();
    dst.insert(dst.end(), copies.begin(), copies.end());
  }

  for (std::size_t i = 0; i <= top; ++i) {
    auto& dst = pools.buckets[i].entries;
    for (std::uint32_t s = 0; s < config.space(); ++s) {
      const ArrivalStamp stamp{t, Phase::Sampled, s};
      const ExpertId expert = source.draw(static_cast<int>(i), stamp);
      if (expert.value >= config.experts()) throw ContractViolation("sampled expert out of range");
      dst.push_back(PoolEntry{expert, stamp, 0.0, 0.0, std::nullopt});
      if (trace) trace->push_back(SampleRecord{static_cast<int>(i), stamp, expert});
    }
    report.levels[i].sampled = config.space();
  }
  return report;
}

}  // namespace memexperts
