#include <benchmark/benchmark.h>

#include "polymerlab/polymer.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/sampling.hpp"
#include "polymerlab/shape_function.hpp"
#include "polymerlab/special_functions.hpp"

using namespace polymerlab;

static void BM_SampleLogInverseGamma(benchmark::State& state) {
  const double shape = static_cast<double>(state.range(0)) / 10.0;
  CounterStream stream(SeedSpec{1, 0}, 0, 0, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_log_inverse_gamma(shape, stream));
  }
}
BENCHMARK(BM_SampleLogInverseGamma)->Arg(3)->Arg(10)->Arg(20);  // shape = 0.3, 1.0, 2.0

static void BM_BuildField(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  PolymerParams params;
  params.alpha = 0.5;
  std::uint32_t replica = 0;
  for (auto _ : state) {
    const WeightField f =
        build_field(params, Geometry::FullRect, GridExtent{1, n, 1, n}, SeedSpec{7, replica++});
    benchmark::DoNotOptimize(f.log_weight(n, n));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_BuildField)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

static void BM_LogPartitionFull(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  PolymerParams params;
  params.alpha = 0.5;
  const WeightField f = build_field(params, Geometry::FullRect, GridExtent{1, n, 1, n},
                                    SeedSpec{11, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_partition(f, Variant::Full, {1, 1}, {n, n}));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_LogPartitionFull)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

static void BM_LogPartitionFlagged(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  PolymerParams params;
  params.alpha = 0.5;
  const WeightField f = build_field(params, Geometry::FullRect, GridExtent{-n / 2, n / 2, -n / 2, n / 2},
                                    SeedSpec{13, 0});
  const Endpoint from{-n / 2, -n / 2};
  const Endpoint to{n / 2, n / 2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_partition_flagged(f, from, to));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_LogPartitionFlagged)
    ->RangeMultiplier(2)
    ->Range(64, 512)
    ->Unit(benchmark::kMillisecond);

static void BM_GInverse(benchmark::State& state) {
  const ShapeContext ctx(0.5);
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g_inverse(ctx, x));
    x = x < 10.0 ? x * 1.01 : 0.1;
  }
}
BENCHMARK(BM_GInverse);

static void BM_Trigamma(benchmark::State& state) {
  double x = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(trigamma(x));
    x = x < 1e5 ? x * 1.001 : 1e-3;
  }
}
BENCHMARK(BM_Trigamma);

BENCHMARK_MAIN();
