#include <benchmark/benchmark.h>

#include "rangelab/capacity.hpp"
#include "rangelab/corrector.hpp"
#include "rangelab/green.hpp"
#include "rangelab/range_index.hpp"
#include "rangelab/rng.hpp"
#include "rangelab/walk.hpp"

using namespace rangelab;

static void BM_SimulateWalk(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const std::int64_t n = state.range(1);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    RngStream rng(1, stream++);
    benchmark::DoNotOptimize(simulate_walk(d, n, rng));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SimulateWalk)->Args({3, 100000})->Args({5, 100000});

static void BM_StreamedRange(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const std::int64_t n = state.range(1);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    RngStream rng(1, stream++);
    benchmark::DoNotOptimize(streamed_range(d, n, rng));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_StreamedRange)->Args({3, 100000})->Args({5, 100000})->Args({3, 1000000});

static void BM_RangeIndex(benchmark::State& state) {
  RngStream rng(2, 0);
  const WalkPath path = simulate_walk(3, state.range(0), rng);
  for (auto _ : state) {
    const RangeIndex index(path);
    benchmark::DoNotOptimize(index.num_sites());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RangeIndex)->Arg(100000);

static void BM_GreenTableBuild(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int T = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(GreenTable::build(d, T).total_mass());
}
BENCHMARK(BM_GreenTableBuild)->Args({3, 50})->Args({3, 150})->Args({5, 20})->Unit(benchmark::kMillisecond);

static void BM_Corrector(benchmark::State& state) {
  const auto table = GreenTable::build(3, static_cast<int>(state.range(1)));
  RngStream rng(3, 0);
  const WalkPath path = simulate_walk(3, state.range(0), rng);
  const RangeIndex index(path);
  for (auto _ : state) benchmark::DoNotOptimize(corrector(index, table));
}
BENCHMARK(BM_Corrector)->Args({10000, 20})->Args({10000, 60})->Unit(benchmark::kMillisecond);

static void BM_CapacityExact(benchmark::State& state) {
  const auto green = GreenFunction::standard(3);
  const SiteSet cube = SiteSet::cube(LatticePoint{0, 0, 0}, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(capacity_exact(cube, *green).cap);
}
BENCHMARK(BM_CapacityExact)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_CapacityMc(benchmark::State& state) {
  const auto green = GreenFunction::standard(3);
  const SiteSet cube = SiteSet::cube(LatticePoint{0, 0, 0}, 3);
  CapacityMcOptions opt;
  opt.trials_per_site = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(capacity_mc(cube, *green, opt).cap);
}
BENCHMARK(BM_CapacityMc)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
