#include <benchmark/benchmark.h>

#include "zwf/gp.hpp"

using namespace zwf;

namespace {

Grid grid_of(int cells_per_side) {
  return Grid::build({0.0, 0.0, static_cast<double>(cells_per_side),
                      static_cast<double>(cells_per_side)},
                     1.0);
}

void BM_GpFactorBuild(benchmark::State& state) {
  const Grid g = grid_of(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    GpFactor f(g, {1.0, 2.43});
    benchmark::DoNotOptimize(f.dim());
  }
  state.SetComplexityN(g.n_active());
}
BENCHMARK(BM_GpFactorBuild)->Arg(10)->Arg(18)->Arg(25)->Complexity();

void BM_GpSample(benchmark::State& state) {
  const Grid g = grid_of(static_cast<int>(state.range(0)));
  GpFactor f(g, {1.0, 2.43});
  Rng rng(7);
  for (auto _ : state) {
    const ScalarField draw = f.sample(rng);
    benchmark::DoNotOptimize(draw.values.sum());
  }
}
BENCHMARK(BM_GpSample)->Arg(18)->Arg(25);

void BM_GpLogpdf(benchmark::State& state) {
  const Grid g = grid_of(static_cast<int>(state.range(0)));
  GpFactor f(g, {1.0, 2.43});
  Rng rng(7);
  const ScalarField draw = f.sample(rng);
  for (auto _ : state) benchmark::DoNotOptimize(f.logpdf(draw));
}
BENCHMARK(BM_GpLogpdf)->Arg(18)->Arg(25);

}  // namespace

BENCHMARK_MAIN();
