#include <benchmark/benchmark.h>

#include "memexperts/pool.hpp"
#include "memexperts/random.hpp"

namespace {

using namespace memexperts;

Bucket random_bucket(std::size_t size, Rng& rng) {
  Bucket b;
  for (std::size_t i = 0; i < size; ++i) {
    PoolEntry e;
    e.expert = ExpertId{static_cast<std::uint32_t>(rng.below(1024))};
    e.arrival = ArrivalStamp{static_cast<Day>(i), Phase::Sampled, 0};
    e.loss_since_arrival = static_cast<double>(rng.below(200));
    b.entries.push_back(e);
  }
  return b;
}

void BM_EvictDominated(benchmark::State& state) {
  Rng rng(3);
  const Bucket original = random_bucket(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) {
    Bucket b = original;
    benchmark::DoNotOptimize(evict_dominated(b, eviction_boundary(0), 0.25));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvictDominated)->RangeMultiplier(4)->Range(16, 4096);

void BM_UpdateBuckets(benchmark::State& state) {
  const HierarchyConfig config(256, 16, {24, 120}, 4200);
  for (auto _ : state) {
    PoolState pools = PoolState::empty(config);
    Rng rng(4);
    UniformExpertSource source(256, rng);
    for (Day t = 0; t < config.horizon(); t += 24) {
      accumulate_losses(pools, [&](ExpertId e) { return static_cast<double>((e.value + t) % 2); });
      update_buckets(pools, config, t, source);
    }
    benchmark::DoNotOptimize(pools.entry_count());
  }
}
BENCHMARK(BM_UpdateBuckets)->Unit(benchmark::kMillisecond);

}  // namespace
