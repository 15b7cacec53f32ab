#include <benchmark/benchmark.h>

#include <vector>

#include "memexperts/mwu.hpp"
#include "memexperts/random.hpp"

namespace {

using namespace memexperts;

void BM_MwuUpdate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  MwuState mwu(n, 0.05);
  Rng rng(1);
  std::vector<double> losses(n);
  for (double& v : losses) v = rng.uniform();
  for (auto _ : state) {
    mwu.update(losses);
    benchmark::DoNotOptimize(mwu.log_weights().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MwuUpdate)->RangeMultiplier(4)->Range(16, 4096);

void BM_MwuSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<double> log_weights(n);
  for (double& w : log_weights) w = -5.0 * rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(mwu_sample(log_weights, rng));
}
BENCHMARK(BM_MwuSample)->RangeMultiplier(4)->Range(16, 4096);

}  // namespace
