#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "memexperts/errors.hpp"
#include "memexperts/harness.hpp"
#include "memexperts/hierarchy.hpp"
#include "memexperts/mwu.hpp"
#include "memexperts/streams.hpp"
#include "support.hpp"

namespace memexperts {
namespace {

using testing::Gen;

PoolEntry fresh(std::uint32_t expert, Day day = 0, std::uint32_t seq = 0) {
  PoolEntry e;
  e.expert = ExpertId{expert};
  e.arrival = ArrivalStamp{day, Phase::Sampled, seq};
  return e;
}

TEST(Predictions, SingleLevelDrawsFromItsBucket) {
  const HierarchyConfig c(4, 2, {4}, 8);
  PoolState pools = PoolState::empty(c);
  pools.buckets[0].entries = {fresh(1, 0, 0), fresh(3, 0, 1)};
  pools.buckets[0].entries[1].log_weight = kLogWeightFloor;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto preds = get_predictions(pools, rng);
    ASSERT_EQ(preds.size(), 1u);
    EXPECT_EQ(preds[0], ExpertId{1});
  }
}

double big_frequency(const WeightPair& pair, int draws) {
  const HierarchyConfig c(4, 1, {2, 4}, 8);
  PoolState pools = PoolState::empty(c);
  pools.buckets[0].entries = {fresh(0)};
  pools.buckets[1].entries = {fresh(1)};
  pools.weights.pairs[0] = pair;
  Rng rng(99);
  int big = 0;
  for (int i = 0; i < draws; ++i) big += get_predictions(pools, rng)[1] == ExpertId{1};
  return static_cast<double>(big) / draws;
}

TEST(Predictions, SymmetricPairIsAFairCoin) {
  EXPECT_NEAR(big_frequency({0.0, 0.0}, 200000), 0.5, 0.005);
}

TEST(Predictions, PairWeightsSetTheMixingProbability) {
  const double expected = std::exp(1.0) / (1.0 + std::exp(1.0));
  EXPECT_NEAR(expected, 0.731, 1e-3);
  EXPECT_NEAR(big_frequency({0.0, -1.0}, 200000), expected, 0.005);
}

TEST(Predictions, SampleEntryFollowsInternalWeights) {
  Bucket b;
  b.entries = {fresh(0, 0, 0), fresh(1, 0, 1), fresh(2, 0, 2)};
  b.entries[0].log_weight = std::log(0.5);
  b.entries[1].log_weight = std::log(0.25);
  b.entries[2].log_weight = std::log(0.25);
  Rng rng(7);
  std::vector<int> counts(3);
  for (int i = 0; i < 200000; ++i) ++counts[sample_entry(b, rng)];
  EXPECT_NEAR(counts[0] / 200000.0, 0.5, 0.005);
  EXPECT_NEAR(counts[1] / 200000.0, 0.25, 0.005);
  Bucket empty;
  EXPECT_THROW(sample_entry(empty, rng), ContractViolation);
}

TEST(WeightUpdates, SingleLevelChargesEveryEntry) {
  const HierarchyConfig c(4, 2, {4}, 8);
  PoolState pools = PoolState::empty(c);
  pools.buckets[0].entries = {fresh(0, 0, 0), fresh(2, 0, 1)};
  const DayLosses losses({ExpertId{0}, ExpertId{2}}, {1.0, 0.25});
  const std::vector<ExpertId> preds{ExpertId{0}};
  update_weights(pools, c, preds, losses);
  // Two entries: internal rate sqrt(max(1, ln 2) / 4) = 1/2.
  EXPECT_DOUBLE_EQ(pools.buckets[0].entries[0].log_weight, -0.5);
  EXPECT_DOUBLE_EQ(pools.buckets[0].entries[1].log_weight, -0.125);
  EXPECT_DOUBLE_EQ(pools.buckets[0].entries[0].loss_since_arrival, 1.0);
  EXPECT_DOUBLE_EQ(pools.buckets[0].entries[1].loss_since_arrival, 0.25);
}

TEST(WeightUpdates, TwoLevelPairTracksBothPredictions) {
  // T_0 = 2 gives an external rate of exactly 1.
  const HierarchyConfig c(4, 1, {2, 4}, 8);
  PoolState pools = PoolState::empty(c);
  pools.buckets[0].entries = {fresh(0)};
  pools.buckets[1].entries = {fresh(1)};
  const DayLosses losses({ExpertId{0}, ExpertId{1}}, {1.0, 0.0});
  const std::vector<ExpertId> preds{ExpertId{0}, ExpertId{1}};
  update_weights(pools, c, preds, losses);
  EXPECT_DOUBLE_EQ(pools.weights.pairs[0].small, -1.0);
  EXPECT_DOUBLE_EQ(pools.weights.pairs[0].big, 0.0);
  EXPECT_DOUBLE_EQ(pools.buckets[0].entries[0].log_weight, -std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(pools.buckets[1].entries[0].log_weight, 0.0);
}

TEST(WeightUpdates, SignedLossesAreMappedIntoTheUnitInterval) {
  const HierarchyConfig c(4, 1, {4}, 8);
  PoolState pools = PoolState::empty(c);
  pools.buckets[0].entries = {fresh(0)};
  const DayLosses losses({ExpertId{0}}, {-2.0}, 4.0, true);
  const std::vector<ExpertId> preds{ExpertId{0}};
  update_weights(pools, c, preds, losses);
  EXPECT_DOUBLE_EQ(pools.buckets[0].entries[0].loss_since_arrival, 0.25);
}

TEST(WeightUpdates, WrongPredictionCountIsAContractViolation) {
  const HierarchyConfig c(4, 1, {2, 4}, 8);
  PoolState pools = PoolState::empty(c);
  const std::vector<ExpertId> preds{ExpertId{0}};
  EXPECT_THROW(update_weights(pools, c, preds, DayLosses({ExpertId{0}}, {0.0})),
               ContractViolation);
}

TEST(Parameters, BlockTargetsFollowTheExponentSchedule) {
  EXPECT_NEAR(block_size_target(16.0, 0), 16.0, 1e-9);
  EXPECT_NEAR(block_size_target(16.0, 1), 64.0, 1e-9);
  EXPECT_NEAR(block_size_target(16.0, 2), 128.0, 1e-9);
  EXPECT_NEAR(block_size_target(16.0, 2), std::pow(64.0, 1.5) / 4.0, 1e-9);
}

TEST(Parameters, TwoLevelExample) {
  const HierarchyConfig c = choose_parameters(256, 16, 4096);
  // ratio 256: lg lg 256 = 3, minus the offset.
  ASSERT_EQ(c.levels(), 2);
  const Day t0 = static_cast<Day>(std::ceil(std::pow(256.0, 4.0 / 7.0)));
  EXPECT_EQ(t0, 24);
  const Day t1 = static_cast<Day>(std::ceil(std::pow(24.0, 1.5) / 24.0)) * 24;
  EXPECT_EQ(t1, 120);
  EXPECT_EQ(c.block_sizes(), (std::vector<Day>{t0, t1}));
  EXPECT_EQ(c.horizon(), 4200);
  EXPECT_NEAR(c.epsilon(), std::log(4200.0) / 16.0, 1e-12);
}

TEST(Parameters, GridExamples) {
  EXPECT_EQ(choose_parameters(64, 8, 1 << 12).block_sizes().front(), 36);
  EXPECT_EQ(choose_parameters(64, 8, 1 << 12).horizon(), 4104);
  EXPECT_EQ(choose_parameters(64, 8, 1 << 14).block_sizes().front(), 79);
  EXPECT_EQ(choose_parameters(64, 8, 1 << 14).horizon(), 17064);
  EXPECT_EQ(choose_parameters(64, 8, 1 << 16).block_sizes().front(), 173);
  EXPECT_EQ(choose_parameters(64, 8, 1 << 16).horizon(), 67816);
}

TEST(Parameters, ShortHorizonFallsBackToOneLevel) {
  const HierarchyConfig c = choose_parameters(64, 8, 16);
  EXPECT_EQ(c.levels(), 1);
  EXPECT_EQ(c.block_sizes(), std::vector<Day>{2});
  EXPECT_EQ(c.horizon(), 16);
  const HierarchyConfig one = one_level_parameters(64, 8, 1 << 14);
  EXPECT_EQ(one.levels(), 1);
  EXPECT_EQ(one.block_sizes().front(),
            static_cast<Day>(std::ceil(std::pow(1 << 11, 2.0 / 3.0) - 1e-9)));
}

TEST(Parameters, RejectsDegenerateInputs) {
  EXPECT_THROW(choose_parameters(0, 1, 100), ConfigError);
  EXPECT_THROW(choose_parameters(4, 0, 100), ConfigError);
  EXPECT_THROW(choose_parameters(4, 1, 1), ConfigError);
}

TEST(ParameterProperties, BlocksNestAndCoverTheHorizon) {
  Gen gen(5);
  for (int i = 0; i < 2000; ++i) {
    const auto n = static_cast<std::size_t>(gen.integer(1, 4096));
    const auto m = static_cast<std::size_t>(gen.integer(1, 256));
    const Day horizon = gen.integer(2, 1 << 20);
    const HierarchyConfig c = choose_parameters(n, m, horizon, static_cast<int>(gen.integer(0, 2)));
    const auto& sizes = c.block_sizes();
    EXPECT_GE(sizes.front(), 2);
    for (std::size_t j = 1; j < sizes.size(); ++j) {
      EXPECT_GT(sizes[j], sizes[j - 1]);
      EXPECT_EQ(sizes[j] % sizes[j - 1], 0);
    }
    EXPECT_EQ(c.horizon() % sizes.back(), 0);
    EXPECT_GE(c.horizon(), horizon);
    EXPECT_GE(c.horizon(), 2 * sizes.back());
    if (sizes.size() > 1) EXPECT_LE(sizes.back(), horizon / 2);
  }
}

TEST(PoolWords, CountsEntriesPairsAndBookkeeping) {
  const HierarchyConfig c(4, 2, {2, 4}, 8);
  PoolState pools = PoolState::empty(c);
  EXPECT_EQ(pool_words(pools), 2u + 4u + 2u);
  pools.buckets[0].entries = {fresh(0), fresh(1, 0, 1)};
  pools.buckets[1].entries = {fresh(2)};
  EXPECT_EQ(pool_words(pools), 4u * 3u + 2u + 4u + 2u);
}

StreamPtr iid(std::size_t n, Day horizon, std::uint64_t seed, double p_best = 0.3,
              std::size_t best = 0) {
  return std::make_shared<IidBernoulliStream>(n, horizon, seed, 0.5, p_best, best);
}

TEST(HierarchicalRuns, SingleExpertHasZeroRegret) {
  const auto stream = iid(1, 256, 3);
  const HierarchyConfig c = choose_parameters(1, 1, 256);
  const RunRecord r = run_hierarchical(c, *stream, 11);
  EXPECT_EQ(r.days(), 256);
  EXPECT_DOUBLE_EQ(final_regret(r, *stream), 0.0);
}

TEST(HierarchicalRuns, LocksOntoAZeroLossExpert) {
  const Day horizon = 4096;
  const std::uint32_t best = 5;
  const auto stream = iid(32, horizon, 8, 0.0, best);
  const HierarchyConfig c = choose_parameters(32, 8, horizon);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RunRecord r = run_hierarchical(c, *stream, seed);
    Day first = -1;
    for (const SampleRecord& s : r.trace)
      if (s.expert == ExpertId{best}) {
        first = s.stamp.day;
        break;
      }
    ASSERT_GE(first, 0);
    const Day from = first + 2 * c.block_size(0);
    ASSERT_LT(from, horizon);
    double tail = 0.0;
    for (Day d = from; d < horizon; ++d) tail += r.losses[static_cast<std::size_t>(d)];
    EXPECT_LE(tail / static_cast<double>(horizon - from), 0.5) << "seed " << seed;
  }
}

TEST(HierarchicalRuns, AmpleSpaceStaysWithinTheFullInformationEnvelope) {
  const Day horizon = 10000;
  const double envelope = mwu_regret_envelope(8, horizon);
  int within = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto stream = iid(8, horizon, 100 + seed);
    const RunRecord r = run_hierarchical(choose_parameters(8, 8, horizon), *stream, seed);
    within += final_regret(r, *stream) <= envelope;
  }
  EXPECT_GE(within, 18);
}

TEST(HierarchicalRuns, PlaysOnlyQueriedExperts) {
  const auto stream = iid(64, 2048, 4);
  HierarchicalLearner learner(choose_parameters(64, 8, 2048), 4);
  std::vector<double> row(64);
  for (Day d = 0; d < 2048; ++d) {
    const auto q = learner.query_set();
    std::vector<ExpertId> ids(q.begin(), q.end());
    ASSERT_TRUE(std::is_sorted(ids.begin(), ids.end()));
    ASSERT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
    const ExpertId played = learner.play();
    ASSERT_TRUE(std::binary_search(ids.begin(), ids.end(), played));
    std::vector<double> values;
    for (ExpertId e : ids) values.push_back(stream->loss(d, e));
    learner.observe(DayLosses(ids, values));
  }
}

TEST(HierarchicalRuns, SameSeedSameRun) {
  const auto stream = iid(64, 4096, 9);
  const HierarchyConfig c = choose_parameters(64, 8, 4096);
  const RunRecord a = run_hierarchical(c, *stream, 21);
  const RunRecord b = run_hierarchical(c, *stream, 21);
  EXPECT_EQ(a.plays, b.plays);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.peak_words, b.peak_words);
  const RunRecord other = run_hierarchical(c, *stream, 22);
  EXPECT_NE(a.trace, other.trace);
}

TEST(HierarchicalRuns, SamplingTraceIsIndependentOfLosses) {
  const HierarchyConfig c = choose_parameters(64, 8, 4096);
  const auto stream = iid(64, 4096, 10);
  const RunRecord r = run_hierarchical(c, *stream, 33, 3000);
  EXPECT_EQ(generate_sampling_trace(c, 33, 3000), r.trace);
  const ConstantStream flat(64, 4096, 0.0);
  EXPECT_EQ(run_hierarchical(c, flat, 33, 3000).trace, r.trace);
}

TEST(HierarchicalRuns, EntryLossesEqualIntervalSums) {
  Gen gen(12);
  const Day days = 1500;
  const auto stream = gen.matrix(16, days, true);
  const HierarchyConfig c = choose_parameters(16, 4, days);
  HierarchicalLearner learner(c, 5);
  run_learner(learner, *stream, days);
  std::size_t checked = 0;
  for (const Bucket& b : learner.pools().buckets)
    for (const PoolEntry& e : b.entries) {
      EXPECT_EQ(e.loss_since_arrival, interval_loss(*stream, e.expert, e.arrival.day, days));
      ++checked;
    }
  EXPECT_GT(checked, 0u);
}

TEST(HierarchicalRuns, PeakEntriesStayPolynomialInLevels) {
  const HierarchyConfig c = choose_parameters(256, 16, 4096);
  const auto k = static_cast<std::size_t>(c.levels());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto stream = iid(256, 4096, 50 + seed);
    HierarchicalLearner learner(c, seed);
    const RunRecord r = run_learner(learner, *stream, 4096);
    const std::size_t fixed = 2 * (k - 1) + 4 + k;
    EXPECT_LE((r.peak_words - fixed) / kWordsPerEntry, 8 * k * k * k * 16);
    for (const BucketUpdateReport& rep : learner.reports())
      for (const LevelUpdate& l : rep.levels)
        EXPECT_LE(static_cast<double>(l.survivors_after_boundary), survivor_bound(c) + 1.0);
  }
}

TEST(HierarchicalRuns, RefusesToPlayPastTheHorizon) {
  const HierarchyConfig c(2, 1, {2}, 4);
  HierarchicalLearner learner(c, 1);
  const ConstantStream flat(2, 4, 0.0);
  run_learner(learner, flat, 4);
  EXPECT_EQ(learner.day(), 4);
  EXPECT_THROW(learner.play(), HorizonError);
}

TEST(HierarchicalRuns, DescribesItself) {
  const HierarchicalLearner two(choose_parameters(256, 16, 4096), 3);
  const auto d = two.describe();
  EXPECT_EQ(d.at("algorithm"), "hier");
  EXPECT_EQ(d.at("k"), 2);
  EXPECT_EQ(d.at("T"), 4200);
  const HierarchicalLearner one(one_level_parameters(256, 16, 4096), 3);
  EXPECT_EQ(one.describe().at("algorithm"), "onelevel");
}

}  // namespace
}  // namespace memexperts
