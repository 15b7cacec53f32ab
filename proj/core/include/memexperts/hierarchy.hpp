#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "memexperts/learner.hpp"
#include "memexperts/pool.hpp"
#include "memexperts/random.hpp"
#include "memexperts/types.hpp"

namespace memexperts {

// Below T = kMinHorizonFactor * n / m the parameter chooser falls back to k = 1.
inline constexpr double kMinHorizonFactor = 4.0;

// Entry index drawn proportionally to the bucket's internal weights.
std::size_t sample_entry(const Bucket& bucket, Rng& rng);

// preds_0 .. preds_{k-1}; the learner plays the last one.
std::vector<ExpertId> get_predictions(const PoolState& pools, Rng& rng);

// One day of loss bookkeeping and MWU updates. Losses are read through
// DayLosses::unit, so signed inputs are mapped into [0, 1] first.
void update_weights(PoolState& pools, const HierarchyConfig& config,
                    std::span<const ExpertId> preds, const DayLosses& losses);

// Unrounded T_i = T_0^((2^(i+1) - 1) / 2^i).
double block_size_target(double t0, int level);

// Rounded block sizes T_0 .. T_{k-1} for a fixed number of levels.
std::vector<Day> block_sizes_for(std::size_t n, std::size_t m, Day horizon, int levels);

// Smallest multiple of the top block size that covers `horizon` and exceeds
// the top block size.
Day padded_horizon(const std::vector<Day>& block_sizes, Day horizon);

// Levels and block sizes for horizon T; the returned config's horizon is the
// padded one.
HierarchyConfig choose_parameters(std::size_t n, std::size_t m, Day horizon, int k_offset = 1);

// The same chooser pinned to a single level.
HierarchyConfig one_level_parameters(std::size_t n, std::size_t m, Day horizon);

// Words charged per pool entry: id, stamp, loss, weight.
inline constexpr std::size_t kWordsPerEntry = 4;

// Words for pool entries and pair weights plus fixed bookkeeping (day counter,
// n, m, k and the block sizes).
std::size_t pool_words(const PoolState& pools);

class HierarchicalLearner final : public OnlineLearner {
 public:
  HierarchicalLearner(HierarchyConfig config, std::uint64_t seed);

  std::size_t experts() const override { return config_.experts(); }
  Day horizon() const override { return config_.horizon(); }
  std::span<const ExpertId> query_set() override;
  ExpertId play() override;
  void observe(const DayLosses& losses) override;
  std::size_t tracked_words() const override { return pool_words(pools_); }
  nlohmann::json describe() const override;

  const HierarchyConfig& config() const noexcept { return config_; }
  const PoolState& pools() const noexcept { return pools_; }
  const SamplingTrace& trace() const noexcept { return trace_; }
  const std::vector<BucketUpdateReport>& reports() const noexcept { return reports_; }
  // Days completed so far.
  Day day() const noexcept { return day_; }

 private:
  HierarchyConfig config_;
  std::uint64_t seed_;
  Rng sampling_rng_;
  Rng play_rng_;
  PoolState pools_;
  SamplingTrace trace_;
  std::vector<BucketUpdateReport> reports_;
  std::vector<ExpertId> query_;
  bool query_stale_ = true;
  std::vector<ExpertId> preds_;
  Day day_ = 0;
};

// Runs the learner for `days` days (default: the unpadded length of the
// stream, capped at the config horizon) and attaches its sampling trace.
RunRecord run_hierarchical(const HierarchyConfig& config, const LossStream& stream,
                           std::uint64_t seed, Day days = -1,
                           const DriverOptions& options = {});

// The samples a HierarchicalLearner with this seed draws through day `days`,
// without running it. Sampling never depends on losses.
SamplingTrace generate_sampling_trace(const HierarchyConfig& config, std::uint64_t seed,
                                      Day days);

}  // namespace memexperts
