// Hot-path benchmarks for the sampler: full-state refresh, one scalar
// sweep, and one field sweep on the default reduced scenario.

#include <benchmark/benchmark.h>

#include "zwf/mcmc.hpp"
#include "zwf/simulate.hpp"

using namespace zwf;

namespace {

struct Fixture {
  RunConfig cfg;
  SimOutput sim;
  JointModel model;
  ChainState state;

  Fixture()
      : cfg([] {
          RunConfig c = default_config();
          c.scenario.zoop_sampling = "moderate";
          c.scenario.whale_sampling = "moderate";
          c.mcmc.iterations = 100;
          c.mcmc.burnin = 50;
          return c;
        }()),
        sim(simulate_scenario(cfg.scenario, PsiMode::shared, 17)),
        model(sim.dataset, cfg),
        state(model.init_state(0)) {}
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_Refresh(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) {
    f.model.refresh(f.state);
    benchmark::DoNotOptimize(f.state.data_loglik());
  }
}
BENCHMARK(BM_Refresh);

void BM_UpdateScalars(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) {
    ++f.state.iteration;
    f.model.update_scalars(f.state);
  }
}
BENCHMARK(BM_UpdateScalars);

void BM_UpdateFields(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) {
    ++f.state.iteration;
    f.model.update_fields(f.state);
  }
}
BENCHMARK(BM_UpdateFields);

void BM_FullIteration(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) {
    ++f.state.iteration;
    f.model.update_scalars(f.state);
    f.model.update_fields(f.state);
  }
}
BENCHMARK(BM_FullIteration);

void BM_PosteriorKernel(benchmark::State& state) {
  Fixture& f = fixture();
  f.model.refresh(f.state);
  for (auto _ : state)
    benchmark::DoNotOptimize(f.model.log_posterior(f.state));
}
BENCHMARK(BM_PosteriorKernel);

}  // namespace

BENCHMARK_MAIN();
