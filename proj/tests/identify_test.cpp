#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "epifit/identify.hpp"
#include "synthetic.hpp"

using namespace epifit;
using namespace epifit::identify;

namespace {

DailySeries series_of(std::vector<double> values, int region = 84) {
  DailySeries s;
  s.region = region;
  s.indicator = "mean_excess20_corr";
  s.start = FitWindow{}.k0_date;
  s.values = std::move(values);
  return s;
}

}  // namespace

TEST_CASE("empirical_delta") {
  SUBCASE("constant series gives zeros") {
    const auto d = empirical_delta(series_of({4, 4, 4, 4}));
    CHECK(d.values == std::vector<double>{0, 0, 0});
  }
  SUBCASE("geometric series gives a constant ratio") {
    const auto d = empirical_delta(series_of({1, 2, 4, 8, 16}));
    for (double v : d.values) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("inverts simulate exactly") {
    const dynamics::GlobalParams p{-0.06, -0.005};
    const auto traj = dynamics::simulate(p, {3.0, 0.25}, 40);
    auto s = series_of(traj.f);
    const auto d = empirical_delta(s);
    for (std::size_t k = 0; k < d.size(); ++k)
      CHECK(std::abs(d.values[k] - traj.delta[k]) <= 1e-10);
  }
  SUBCASE("non-positive values are rejected") {
    CHECK_THROWS_AS(empirical_delta(series_of({1, 0, 2})), NonPositiveValue);
  }
}

TEST_CASE("convex_warm_start") {
  SUBCASE("exact affine delta dynamics are recovered") {
    RegionSeries deltas;
    for (int region : {11, 44, 84}) {
      DailySeries s = series_of({}, region);
      double d = 0.1 + 0.05 * region / 84.0;
      for (int k = 0; k < 20; ++k) {
        s.values.push_back(d);
        d = 0.95 * d - 0.005;
      }
      deltas[region] = s;
    }
    const auto [params, delta0] = convex_warm_start(deltas);
    CHECK(params.a == doctest::Approx(-0.05).epsilon(1e-10));
    CHECK(params.u == doctest::Approx(-0.005).epsilon(1e-10));
    CHECK(delta0.at(84) == doctest::Approx(0.15));
  }
  SUBCASE("all-equal deltas are degenerate") {
    RegionSeries deltas;
    deltas[84] = series_of({0, 0, 0, 0});
    CHECK_THROWS_AS(convex_warm_start(deltas), DegenerateRegression);
  }
  SUBCASE("noisy deltas match a brute-force grid refinement") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.01);
    RegionSeries deltas;
    DailySeries s = series_of({});
    double d = 0.3;
    for (int k = 0; k < 60; ++k) {
      s.values.push_back(d + noise(rng));
      d = 0.93 * d - 0.004;
    }
    deltas[84] = s;
    const auto [params, delta0] = convex_warm_start(deltas);

    auto cost = [&](double p, double u) {
      double c = 0;
      for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double r = s.values[k + 1] - p * s.values[k] - u;
        c += r * r;
      }
      return c;
    };
    // Two-stage grid around the closed-form answer's neighbourhood.
    double best_p = 0, best_u = 0, best_c = 1e300;
    for (double p = 0.8; p <= 1.05; p += 1e-3)
      for (double u = -0.05; u <= 0.05; u += 1e-3)
        if (cost(p, u) < best_c) best_c = cost(p, u), best_p = p, best_u = u;
    for (double p = best_p - 2e-3; p <= best_p + 2e-3; p += 1e-5)
      for (double u = best_u - 2e-3; u <= best_u + 2e-3; u += 1e-5)
        if (cost(p, u) < best_c) best_c = cost(p, u), best_p = p, best_u = u;
    CHECK(std::abs((1.0 + params.a) - best_p) <= 2e-5);
    CHECK(std::abs(params.u - best_u) <= 2e-5);
  }
}

TEST_CASE("objective") {
  const FitWindow window;
  SUBCASE("perfect fit costs zero") {
    const auto data = testutil::synthetic_dataset();
    const auto w = default_weights(data);
    CHECK(objective(testutil::kReferenceParams, testutil::reference_inits(), data, w) == 0.0);
  }
  SUBCASE("constant one-region cases") {
    RegionSeries data;
    data[84] = series_of(std::vector<double>(10, 1.0));
    RegionWeights w;
    w.q[84] = 1.0;
    std::map<int, dynamics::RegionInit> inits{{84, {1.0, 0.0}}};
    CHECK(objective({0.0, 0.0}, inits, data, w) == 0.0);
    inits[84].f0 = 2.0;
    CHECK(objective({0.0, 0.0}, inits, data, w) == doctest::Approx(10.0));
  }
  SUBCASE("cost scales quadratically with a joint data/f0 scaling") {
    const auto data = testutil::synthetic_dataset();
    const auto w = default_weights(data);
    auto inits = testutil::reference_inits();
    for (auto& [r, init] : inits) init.delta0 += 0.01;  // leave the optimum
    const double base = objective(testutil::kReferenceParams, inits, data, w);
    REQUIRE(base > 0.0);
    for (double c : {0.5, 3.0, 10.0}) {
      auto scaled_data = data;
      for (auto& [r, s] : scaled_data)
        for (double& v : s.values) v *= c;
      auto scaled_inits = inits;
      for (auto& [r, init] : scaled_inits) init.f0 *= c;
      const double scaled = objective(testutil::kReferenceParams, scaled_inits, scaled_data, w);
      CHECK(std::abs(scaled - c * c * base) <= 1e-9 * std::abs(c * c * base));
    }
  }
  SUBCASE("non-finite simulation costs +inf") {
    RegionSeries data;
    data[84] = series_of(std::vector<double>(10, 1.0));
    RegionWeights w;
    w.q[84] = 1.0;
    std::map<int, dynamics::RegionInit> inits{{84, {1e308, 1.9}}};
    CHECK(std::isinf(objective({0.9, 0.9}, inits, data, w)));
  }
}

TEST_CASE("default_weights") {
  RegionSeries data;
  data[84] = series_of({2, 10, 4});
  data[11] = series_of({100, 1, 5}, 11);
  const auto w = default_weights(data);
  CHECK(w.q.at(84) == doctest::Approx(0.01));
  CHECK(w.q.at(11) == doctest::Approx(1e-4));

  RegionSeries zero;
  zero[84] = series_of({0, 0});
  CHECK_THROWS_AS(default_weights(zero), NonPositiveMax);
}

TEST_CASE("identify") {
  const FitWindow window;
  SUBCASE("noise-free synthetic recovery") {
    const auto data = testutil::synthetic_dataset();
    const auto w = default_weights(data);
    mds::MdsConfig cfg;
    cfg.max_evals = 50000;
    const auto model = epifit::identify::identify(data, window, w, cfg);
    CHECK(std::abs(model.params.a - testutil::kReferenceParams.a) <= 5e-3);
    CHECK(std::abs(model.params.u - testutil::kReferenceParams.u) <= 5e-4);
    CHECK(model.inits.size() == 13);
    // Reported cost is reproducible from the stored fields.
    const auto clipped = clip_to_window(data, window);
    const double recomputed = objective(model.params, model.inits, clipped, w);
    CHECK(std::abs(recomputed - model.cost) <=
          1e-9 * std::max(std::abs(model.cost), 1e-300));
  }
  SUBCASE("data already at the warm start stays there") {
    // Build one region whose data is exactly the trajectory of its own
    // warm start, so the solver has nothing to improve.
    const dynamics::GlobalParams p{-0.05, -0.004};
    const auto traj = dynamics::simulate(p, {5.0, 0.3}, window.length() - 1);
    RegionSeries data;
    data[84] = series_of(traj.f);
    const auto w = default_weights(data);
    mds::MdsConfig cfg;
    cfg.max_evals = 20000;
    const auto model = epifit::identify::identify(data, window, w, cfg);
    CHECK(model.params.a == doctest::Approx(p.a).epsilon(1e-6));
    CHECK(model.params.u == doctest::Approx(p.u).epsilon(1e-6));
    CHECK(model.inits.at(84).f0 == doctest::Approx(5.0).epsilon(1e-6));
  }
  SUBCASE("returned cost never exceeds the warm-start cost") {
    const auto data = testutil::noisy_dataset(0.05, 17);
    const auto w = default_weights(data);
    const auto clipped = clip_to_window(data, window);
    RegionSeries deltas;
    for (const auto& [r, s] : clipped) deltas[r] = empirical_delta(s);
    const auto [wp, wd] = convex_warm_start(deltas);
    std::map<int, dynamics::RegionInit> winits;
    for (const auto& [r, d0] : wd)
      winits[r] = {std::max(clipped.at(r).values.front(), kF0Floor), d0};
    const double warm = objective(wp, winits, clipped, w);
    REQUIRE(std::isfinite(warm));

    mds::MdsConfig cfg;
    cfg.max_evals = 60000;
    const auto model = epifit::identify::identify(data, window, w, cfg);
    CHECK(model.cost <= warm);
  }
  SUBCASE("scaling the data scales only the f0 estimates") {
    const auto data = testutil::synthetic_dataset();
    const auto w = default_weights(data);
    mds::MdsConfig cfg;
    cfg.max_evals = 50000;
    const double c = 3.0;
    auto scaled = data;
    for (auto& [r, s] : scaled)
      for (double& v : s.values) v *= c;
    const auto m1 = epifit::identify::identify(data, window, w, cfg);
    const auto m2 = epifit::identify::identify(scaled, window, default_weights(scaled), cfg);
    CHECK(m2.params.a == doctest::Approx(m1.params.a).epsilon(1e-6));
    CHECK(m2.params.u == doctest::Approx(m1.params.u).epsilon(1e-6));
    for (const auto& [r, init] : m1.inits) {
      CHECK(m2.inits.at(r).delta0 == doctest::Approx(init.delta0).epsilon(1e-6));
      CHECK(m2.inits.at(r).f0 == doctest::Approx(c * init.f0).epsilon(1e-6));
    }
  }
}

TEST_CASE("model json round trip") {
  const auto data = testutil::synthetic_dataset();
  const auto w = default_weights(data);
  mds::MdsConfig cfg;
  cfg.max_evals = 5000;
  const auto model = epifit::identify::identify(data, FitWindow{}, w, cfg);
  const auto restored = model_from_json(to_json(model));
  CHECK(restored.params.a == model.params.a);
  CHECK(restored.params.u == model.params.u);
  CHECK(restored.cost == model.cost);
  CHECK(restored.inits.size() == model.inits.size());
  for (const auto& [r, init] : model.inits) {
    CHECK(restored.inits.at(r).f0 == init.f0);
    CHECK(restored.inits.at(r).delta0 == init.delta0);
  }
  CHECK(restored.window.k0_date == model.window.k0_date);
}
