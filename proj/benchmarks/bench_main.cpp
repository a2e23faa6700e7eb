#include <benchmark/benchmark.h>

#include "nmwf/ensemble.hpp"
#include "nmwf/model.hpp"
#include "nmwf/trajectory.hpp"

namespace {

using namespace nmwf;

void BM_CoefficientEval(benchmark::State& state) {
  QbmModel model(fig1_config().model);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.gamma(0, t));
    benchmark::DoNotOptimize(model.gamma(1, t));
    t += 1e-3;
    if (t > 5.0) t = 0.0;
  }
}
BENCHMARK(BM_CoefficientEval);

void BM_McwfTrajectory(benchmark::State& state) {
  const RunConfig cfg = fig1_config();
  QbmModel model(cfg.model);
  TrajectoryConfig tc;
  tc.model = &model;
  tc.unravelling = cfg.unravelling;
  tc.beta = cfg.beta;
  tc.dt = cfg.dt;
  tc.horizon = cfg.t_final;
  tc.sample_grid = make_sample_grid(cfg.t_final, cfg.samples);
  tc.n_max = cfg.n_max;
  tc.initial = cfg.state;
  McwfDriver driver(tc);
  std::uint64_t id = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(driver.run(cfg.seed, id++));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_McwfTrajectory);

void BM_DoubledTrajectory(benchmark::State& state) {
  const RunConfig cfg = fig2_config();
  QbmModel model(cfg.model);
  TrajectoryConfig tc;
  tc.model = &model;
  tc.unravelling = cfg.unravelling;
  tc.beta = cfg.beta;
  tc.dt = cfg.dt;
  tc.horizon = cfg.t_final;
  tc.sample_grid = make_sample_grid(cfg.t_final, cfg.samples);
  tc.n_max = cfg.n_max;
  tc.initial = cfg.state;
  DoubledDriver driver(tc);
  std::uint64_t id = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(driver.run(cfg.seed, id++));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DoubledTrajectory);

}  // namespace

BENCHMARK_MAIN();
