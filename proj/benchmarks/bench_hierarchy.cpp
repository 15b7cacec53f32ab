#include <benchmark/benchmark.h>

#include "memexperts/hierarchy.hpp"
#include "memexperts/streams.hpp"

namespace {

using namespace memexperts;

void BM_HierarchicalRun(benchmark::State& state) {
  const Day horizon = state.range(0);
  const HierarchyConfig config = choose_parameters(64, 8, horizon);
  const DriftingBestStream stream(64, horizon, 5, horizon / 8, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(run_hierarchical(config, stream, 6).cumulative_loss);
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_HierarchicalRun)->Arg(1 << 12)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

void BM_GetPredictions(benchmark::State& state) {
  const HierarchyConfig config = choose_parameters(256, 16, 4096);
  HierarchicalLearner learner(config, 7);
  Rng rng(8);
  for (auto _ : state) benchmark::DoNotOptimize(get_predictions(learner.pools(), rng));
}
BENCHMARK(BM_GetPredictions);

}  // namespace
