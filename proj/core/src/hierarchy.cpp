#include "memexperts/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memexperts/errors.hpp"
#include "memexperts/mwu.hpp"

namespace memexperts {

std::size_t sample_entry(const Bucket& bucket, Rng& rng) {
  const auto& entries = bucket.entries;
  if (entries.empty())
    throw ContractViolation("bucket " + std::to_string(bucket.level) + " is empty");
  if (entries.size() == 1) return 0;
  double top = entries.front().log_weight;
  for (const PoolEntry& e : entries) top = std::max(top, e.log_weight);
  double total = 0.0;
  for (const PoolEntry& e : entries) total += std::exp(e.log_weight - top);
  double target = rng.uniform() * total;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    target -= std::exp(entries[i].log_weight - top);
    if (target < 0.0) return i;
  }
  return entries.size() - 1;
}

std::vector<ExpertId> get_predictions(const PoolState& pools, Rng& rng) {
  std::vector<ExpertId> preds;
  preds.reserve(pools.buckets.size());
  for (std::size_t i = 0; i < pools.buckets.size(); ++i) {
    const Bucket& bucket = pools.buckets[i];
    const ExpertId e = bucket.entries[sample_entry(bucket, rng)].expert;
    if (i == 0) {
      preds.push_back(e);
      continue;
    }
    const WeightPair& w = pools.weights.pairs[i - 1];
    const double p_big = 1.0 / (1.0 + std::exp(w.small - w.big));
    preds.push_back(rng.bernoulli(p_big) ? e : preds.back());
  }
  return preds;
}

void update_weights(PoolState& pools, const HierarchyConfig& config,
                    std::span<const ExpertId> preds, const DayLosses& losses) {
  const std::size_t k = pools.buckets.size();
  if (preds.size() != k) throw ContractViolation("one prediction per level expected");
  for (std::size_t i = 0; i < k; ++i) {
    Bucket& bucket = pools.buckets[i];
    const Day block = config.block_size(static_cast<int>(i));
    const LearningRates rates = learning_rates(bucket.size(), block);
    for (PoolEntry& entry : bucket.entries) {
      const double loss = losses.unit(entry.expert);
      entry.loss_since_arrival += loss;
      entry.log_weight = mwu_step(entry.log_weight, loss, rates.internal);
    }
    const double pred_loss = losses.unit(preds[i]);
    if (i > 0) {
      const double eta_prev = learning_rates(1, config.block_size(static_cast<int>(i - 1))).external;
      WeightPair& pair = pools.weights.pairs[i - 1];
      pair.big = mwu_step(pair.big, pred_loss, eta_prev);
    }
    if (i + 1 < k) {
      WeightPair& pair = pools.weights.pairs[i];
      pair.small = mwu_step(pair.small, pred_loss, rates.external);
    }
  }
}

namespace {

Day ceil_day(double v) {
  // Absorbs pow() noise on exact integer targets.
  return static_cast<Day>(std::ceil(v - 1e-9));
}

int level_count(std::size_t n, std::size_t m, Day horizon, int k_offset) {
  const double ratio = static_cast<double>(horizon) * static_cast<double>(m) /
                       static_cast<double>(n);
  if (static_cast<double>(horizon) < kMinHorizonFactor * static_cast<double>(n) /
                                         static_cast<double>(m))
    return 1;
  if (ratio <= 2.0) return 1;
  const int k = static_cast<int>(std::floor(std::log2(std::log2(ratio)) + 1e-12)) - k_offset;
  return std::max(1, k);
}

}  // namespace

double block_size_target(double t0, int level) {
  const double two_i = std::ldexp(1.0, level);
  return std::pow(t0, (2.0 * two_i - 1.0) / two_i);
}

std::vector<Day> block_sizes_for(std::size_t n, std::size_t m, Day horizon, int levels) {
  if (n == 0 || m == 0) throw ConfigError("n and m must be positive");
  if (horizon < 2) throw ConfigError("horizon must be at least 2");
  if (levels < 1) throw ConfigError("need at least one level");
  const double ratio = static_cast<double>(horizon) * static_cast<double>(m) /
                       static_cast<double>(n);
  const double two_k = std::ldexp(1.0, levels);
  std::vector<Day> sizes;
  sizes.push_back(std::max<Day>(2, ceil_day(std::pow(ratio, two_k / (2.0 * two_k - 1.0)))));
  if (levels == 1) sizes[0] = std::min(sizes[0], std::max<Day>(2, horizon / 2));
  const double t0 = static_cast<double>(sizes[0]);
  for (int i = 1; i < levels; ++i) {
    const double target = block_size_target(t0, i);
    const Day prev = sizes.back();
    Day next = ceil_day(target / static_cast<double>(prev)) * prev;
    if (next <= prev) next = 2 * prev;
    sizes.push_back(next);
  }
  return sizes;
}

Day padded_horizon(const std::vector<Day>& block_sizes, Day horizon) {
  const Day top = block_sizes.back();
  const Day padded = ((horizon + top - 1) / top) * top;
  return std::max(padded, 2 * top);
}

HierarchyConfig choose_parameters(std::size_t n, std::size_t m, Day horizon, int k_offset) {
  if (n == 0 || m == 0) throw ConfigError("n and m must be positive");
  if (horizon < 2) throw ConfigError("horizon must be at least 2");
  int k = level_count(n, m, horizon, k_offset);
  std::vector<Day> sizes = block_sizes_for(n, m, horizon, k);
  while (k > 1 && sizes.back() > horizon / 2) sizes = block_sizes_for(n, m, horizon, --k);
  return HierarchyConfig(n, m, sizes, padded_horizon(sizes, horizon));
}

HierarchyConfig one_level_parameters(std::size_t n, std::size_t m, Day horizon) {
  std::vector<Day> sizes = block_sizes_for(n, m, horizon, 1);
  return HierarchyConfig(n, m, sizes, padded_horizon(sizes, horizon));
}

std::size_t pool_words(const PoolState& pools) {
  return kWordsPerEntry * pools.entry_count() + 2 * pools.weights.size() + 4 +
         pools.buckets.size();
}

HierarchicalLearner::HierarchicalLearner(HierarchyConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      seed_(seed),
      sampling_rng_(derive_seed(seed, "sampling")),
      play_rng_(derive_seed(seed, "play")),
      pools_(PoolState::empty(config_)) {
  UniformExpertSource source(config_.experts(), sampling_rng_);
  reports_.push_back(update_buckets(pools_, config_, 0, source, &trace_));
}

std::span<const ExpertId> HierarchicalLearner::query_set() {
  if (query_stale_) {
    query_.clear();
    for (const Bucket& b : pools_.buckets)
      for (const PoolEntry& e : b.entries) query_.push_back(e.expert);
    query_ = distinct_experts(std::move(query_));
    query_stale_ = false;
  }
  return query_;
}

ExpertId HierarchicalLearner::play() {
  if (day_ >= config_.horizon()) throw HorizonError("learner horizon exhausted");
  preds_ = get_predictions(pools_, play_rng_);
  return preds_.back();
}

void HierarchicalLearner::observe(const DayLosses& losses) {
  if (preds_.empty()) throw ContractViolation("observe called before play");
  update_weights(pools_, config_, preds_, losses);
  preds_.clear();
  ++day_;
  // The update at the horizon itself would only prepare a day that never comes.
  if (day_ % config_.block_size(0) == 0 && day_ < config_.horizon()) {
    UniformExpertSource source(config_.experts(), sampling_rng_);
    reports_.push_back(update_buckets(pools_, config_, day_, source, &trace_));
    query_stale_ = true;
  }
}

nlohmann::json HierarchicalLearner::describe() const {
  return {{"algorithm", config_.levels() == 1 ? "onelevel" : "hier"},
          {"n", config_.experts()},
          {"m", config_.space()},
          {"k", config_.levels()},
          {"block_sizes", config_.block_sizes()},
          {"T", config_.horizon()},
          {"epsilon", config_.epsilon()},
          {"seed", seed_}};
}

RunRecord run_hierarchical(const HierarchyConfig& config, const LossStream& stream,
                           std::uint64_t seed, Day days, const DriverOptions& options) {
  if (days < 0) days = std::min(stream.horizon(), config.horizon());
  if (days > config.horizon()) throw HorizonError("run longer than the configured horizon");
  HierarchicalLearner learner(config, seed);
  RunRecord record = run_learner(learner, stream, days, options);
  record.trace = learner.trace();
  record.seeds.algorithm = seed;
  return record;
}

SamplingTrace generate_sampling_trace(const HierarchyConfig& config, std::uint64_t seed,
                                      Day days) {
  Rng rng(derive_seed(seed, "sampling"));
  SamplingTrace trace;
  const Day t0 = config.block_size(0);
  for (Day t = 0; t <= days && t < config.horizon(); t += t0) {
    int top = 0;
    for (int i = 1; i < config.levels(); ++i)
      if (t % config.block_size(i) == 0) top = i;
    for (int i = 0; i <= top; ++i)
      for (std::uint32_t s = 0; s < config.space(); ++s)
        trace.push_back(SampleRecord{i, ArrivalStamp{t, Phase::Sampled, s},
                                     ExpertId{static_cast<std::uint32_t>(rng.below(config.experts()))}});
  }
  return trace;
}

}  // namespace memexperts
