#include <benchmark/benchmark.h>

#include <random>

#include "epifit/dynamics.hpp"
#include "epifit/series_prep.hpp"
#include "epifit/torczon.hpp"

using namespace epifit;

static void BM_Simulate(benchmark::State& state) {
  const dynamics::GlobalParams p{-7.1e-2, -6.2e-3};
  const dynamics::RegionInit init{7.0, 0.32};
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto traj = dynamics::simulate(p, init, steps);
    benchmark::DoNotOptimize(traj.f.data());
  }
}
BENCHMARK(BM_Simulate)->Arg(42)->Arg(400);

static void BM_MovingAverage(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uv(0.0, 100.0);
  DailySeries s;
  s.region = 84;
  s.indicator = "deces_2020";
  s.start = make_date(2020, 1, 1);
  s.values.resize(static_cast<std::size_t>(state.range(0)));
  for (auto& v : s.values) v = uv(rng);
  for (auto _ : state) {
    auto out = prep::moving_average(s, {14, prep::Alignment::centered});
    benchmark::DoNotOptimize(out.values.data());
  }
}
BENCHMARK(BM_MovingAverage)->Arg(366)->Arg(4000);

static void BM_TorczonRosenbrock(benchmark::State& state) {
  const auto rosen = [](const std::vector<double>& x) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  mds::MdsConfig cfg;
  cfg.max_evals = state.range(0);
  cfg.size_tol = 1e-14;
  for (auto _ : state) {
    auto res = mds::minimize(rosen, {-1.2, 1.0}, mds::Box::unbounded(2), cfg);
    benchmark::DoNotOptimize(res.cost_best);
  }
}
BENCHMARK(BM_TorczonRosenbrock)->Arg(2000)->Arg(20000);

BENCHMARK_MAIN();
