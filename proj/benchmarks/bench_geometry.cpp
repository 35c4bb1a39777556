#include <benchmark/benchmark.h>

#include "zwf/grid.hpp"
#include "zwf/whale.hpp"

using namespace zwf;

namespace {

void BM_BuildGridMasked(benchmark::State& state) {
  const std::vector<Point> mask = {{0, 0},   {45, 0},  {45, 28},
                                   {30, 45}, {12, 45}, {0, 30}};
  for (auto _ : state) {
    const Grid g = Grid::build({0, 0, 45, 45}, 1.0, mask);
    benchmark::DoNotOptimize(g.n_active());
  }
}
BENCHMARK(BM_BuildGridMasked);

void BM_DistToTransectGrid(benchmark::State& state) {
  const Grid g = Grid::build({0, 0, 25, 15}, 1.0);
  const Transect t{0, {{0, 7.3}, {8, 7.6}, {16, 7.2}, {25, 7.4}}};
  for (auto _ : state) {
    double acc = 0.0;
    for (int a = 0; a < g.n_active(); ++a)
      acc += dist_to_transect(g.centroid(g.active_ids()[a]), t);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_DistToTransectGrid);

void BM_PamDetectionGrid(benchmark::State& state) {
  const Grid g = Grid::build({0, 0, 25, 15}, 1.0);
  const Hydrophone k{0, {12.0, 7.0}};
  for (auto _ : state) {
    double acc = 0.0;
    for (int a = 0; a < g.n_active(); ++a)
      acc += pam_detection(105.0,
                           dist_to_hydrophone(g.centroid(g.active_ids()[a]), k));
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_PamDetectionGrid);

void BM_IntegrateField(benchmark::State& state) {
  const Grid g = Grid::build({0, 0, 45, 45}, 1.0);
  const ScalarField f(g, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_field(f));
}
BENCHMARK(BM_IntegrateField);

}  // namespace

BENCHMARK_MAIN();
