#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "epifit/lagfit.hpp"
#include "synthetic.hpp"

using namespace epifit;
using namespace epifit::lagfit;

namespace {

const identify::FitWindow kWindow{};

DailySeries window_series(std::vector<double> values, int lead_days = 0,
                          const std::string& tag = "incid_hosp", int region = 84) {
  DailySeries s;
  s.region = region;
  s.indicator = tag;
  s.start = kWindow.k0_date - std::chrono::days(lead_days);
  s.values = std::move(values);
  return s;
}

// Synthetic f with the shape of the fitted signal, padded on both sides so
// shifted lookups stay inside the series.
DailySeries padded_model_f(int region = 84, int pad = 20) {
  const auto& init = testutil::reference_inits().at(region);
  const auto traj = epifit::dynamics::simulate(
      testutil::kReferenceParams,
      {init.f0 / 2.0, init.delta0 + 0.05},  // start earlier on the upswing
      kWindow.length() - 1 + 2 * pad);
  DailySeries s;
  s.region = region;
  s.indicator = "fhat";
  s.start = kWindow.k0_date - std::chrono::days(pad);
  s.values = traj.f;
  return s;
}

DailySeries shifted_scaled(const DailySeries& f, int eta, double mu,
                           const std::string& tag, int region) {
  DailySeries H;
  H.region = region;
  H.indicator = tag;
  H.start = kWindow.k0_date;
  for (int k = 0; k < kWindow.length(); ++k) {
    const Date t = kWindow.k0_date + std::chrono::days(k);
    H.values.push_back(mu * f.at(t - std::chrono::days(eta)));
  }
  return H;
}

}  // namespace

TEST_CASE("best_mu") {
  const auto f = padded_model_f();
  SUBCASE("zero H gives mu 0 and sse 0") {
    const auto fit = best_mu(window_series(std::vector<double>(43, 0.0)), f, 0, kWindow);
    CHECK(fit.mu == 0.0);
    CHECK(fit.sse == 0.0);
    CHECK(fit.n_overlap == 43);
  }
  SUBCASE("exact scaled shift is recovered") {
    const auto H = shifted_scaled(f, 3, 2.0, "incid_hosp", 84);
    const auto fit = best_mu(H, f, 3, kWindow);
    CHECK(fit.mu == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.sse <= 1e-18);
  }
  SUBCASE("matches a dense mu grid scan") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uv(0.0, 50.0);
    std::vector<double> hv(43), fv(43 + 40);
    for (auto& v : hv) v = uv(rng);
    for (auto& v : fv) v = uv(rng);
    const auto H = window_series(hv);
    auto fs = window_series(fv, 20, "fhat");
    const auto fit = best_mu(H, fs, 0, kWindow);

    auto sse_at = [&](double mu) {
      double s = 0;
      for (int k = 0; k < 43; ++k) {
        const Date t = kWindow.k0_date + std::chrono::days(k);
        const double r = H.at(t) - mu * fs.at(t);
        s += r * r;
      }
      return s;
    };
    double best = 0, best_sse = sse_at(0);
    for (double mu = 0; mu <= 10.0; mu += 1e-4)
      if (sse_at(mu) < best_sse) best_sse = sse_at(mu), best = mu;
    CHECK(std::abs(fit.mu - best) <= 1e-4);
    // First-order condition at the unclamped optimum.
    double grad = 0;
    for (int k = 0; k < 43; ++k) {
      const Date t = kWindow.k0_date + std::chrono::days(k);
      grad += fs.at(t) * (H.at(t) - fit.mu * fs.at(t));
    }
    CHECK(std::abs(grad) <= 1e-9 * sse_at(fit.mu) + 1e-6);
  }
  SUBCASE("negative correlation clamps mu at zero") {
    std::vector<double> hv(43), fv(43 + 40);
    for (int k = 0; k < 43; ++k) hv[static_cast<std::size_t>(k)] = 43.0 - k;
    for (std::size_t k = 0; k < fv.size(); ++k) fv[k] = static_cast<double>(k);
    auto H = window_series(hv);
    // Anti-correlated source: mu would be negative unclamped.
    std::vector<double> anti(83);
    for (std::size_t k = 0; k < anti.size(); ++k)
      anti[k] = static_cast<double>(k) - 41.0;
    auto fit = best_mu(H, window_series(anti, 20, "fhat"), 0, kWindow);
    CHECK(fit.mu == 0.0);
  }
  SUBCASE("empty overlap and degenerate source") {
    const auto H = window_series(std::vector<double>(43, 1.0));
    CHECK_THROWS_AS(best_mu(H, window_series({1.0}, 400, "fhat"), 0, kWindow),
                    EmptyOverlap);
    CHECK_THROWS_AS(
        best_mu(H, window_series(std::vector<double>(83, 0.0), 20, "fhat"), 0, kWindow),
        DegenerateSource);
  }
}

TEST_CASE("fit_lag_scale") {
  const auto f = padded_model_f();
  LagSearchSpec spec;
  SUBCASE("plants a positive lag exactly") {
    const auto H = shifted_scaled(f, 3, 2.0, "incid_hosp", 84);
    const auto fit = fit_lag_scale(H, f, spec);
    CHECK(fit.eta == 3);
    CHECK(fit.mu == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.sse <= 1e-15);
  }
  SUBCASE("plants a negative lag exactly") {
    const auto H = shifted_scaled(f, -2, 0.5, "incid_dc", 84);
    const auto fit = fit_lag_scale(H, f, spec);
    CHECK(fit.eta == -2);
    CHECK(fit.mu == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("recovers a planted lag under 2% noise") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> noise(0.0, 0.02);
    auto H = shifted_scaled(f, 6, 0.8, "incid_rea", 84);
    for (double& v : H.values) v *= 1.0 + noise(rng);
    const auto fit = fit_lag_scale(H, f, spec);
    CHECK(fit.eta == 6);
    CHECK(std::abs(fit.mu - 0.8) <= 0.05 * 0.8);
  }
  SUBCASE("grid optimality of the winner") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, 0.1);
    auto H = shifted_scaled(f, 4, 1.3, "pos", 84);
    for (double& v : H.values) v *= 1.0 + noise(rng);
    const auto fit = fit_lag_scale(H, f, spec);
    const double winner_mse = fit.sse / fit.n_overlap;
    for (int eta = spec.eta_min; eta <= spec.eta_max; ++eta) {
      const auto m = best_mu(H, f, eta, kWindow);
      CHECK(winner_mse <= m.sse / m.n_overlap + 1e-12);
    }
  }
  SUBCASE("scale equivariance") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> noise(0.0, 0.05);
    auto H = shifted_scaled(f, 2, 1.1, "incid_hosp", 84);
    for (double& v : H.values) v *= 1.0 + noise(rng);
    const auto base = fit_lag_scale(H, f, spec);
    for (double c : {0.25, 4.0}) {
      auto scaled = H;
      for (double& v : scaled.values) v *= c;
      const auto fit = fit_lag_scale(scaled, f, spec);
      CHECK(fit.eta == base.eta);
      CHECK(fit.mu == doctest::Approx(c * base.mu).epsilon(1e-9));
      CHECK(fit.sse == doctest::Approx(c * c * base.sse).epsilon(1e-9));
    }
  }
  SUBCASE("shift equivariance") {
    const auto H = shifted_scaled(f, 1, 0.9, "incid_hosp", 84);
    for (int d : {1, 3}) {
      auto shifted = H;
      shifted.start = H.start + std::chrono::days(d);
      const auto fit = fit_lag_scale(shifted, f, spec);
      CHECK(fit.eta == 1 + d);
    }
  }
}

TEST_CASE("validate_all") {
  LagSearchSpec spec;
  SUBCASE("empty measured map") {
    const auto report = validate_all({{84, padded_model_f()}}, {}, spec);
    CHECK(report.fits.empty());
    CHECK(report.errors.empty());
  }
  SUBCASE("one exact pair") {
    const auto f = padded_model_f();
    std::map<std::pair<int, std::string>, DailySeries> measured;
    measured[{84, "incid_hosp"}] = shifted_scaled(f, 5, 3.4, "incid_hosp", 84);
    const auto report = validate_all({{84, f}}, measured, spec);
    REQUIRE(report.fits.size() == 1);
    CHECK(report.fits[0].eta == 5);
    CHECK(report.fits[0].sse <= 1e-12);
  }
  SUBCASE("three regions, nine indicators, known answers") {
    std::map<int, DailySeries> model_f;
    std::map<std::pair<int, std::string>, DailySeries> measured;
    std::map<std::pair<int, std::string>, std::pair<int, double>> planted;
    int eta = -5;
    double mu = 0.3;
    for (int region : {11, 44, 84}) {
      const auto f = padded_model_f(region);
      model_f[region] = f;
      for (const auto& tag : validated_indicators()) {
        planted[{region, tag}] = {eta, mu};
        measured[{region, tag}] = shifted_scaled(f, eta, mu, tag, region);
        eta = eta >= 11 ? -5 : eta + 1;
        mu += 0.17;
      }
    }
    const auto report = validate_all(model_f, measured, spec);
    CHECK(report.errors.empty());
    REQUIRE(report.fits.size() == 27);
    for (const auto& fit : report.fits) {
      const auto [e, m] = planted.at({fit.region, fit.indicator});
      CHECK(fit.eta == e);
      CHECK(std::abs(fit.mu - m) <= 1e-6 * m);
    }
  }
  SUBCASE("per-pair failures are collected, not fatal") {
    const auto f = padded_model_f();
    std::map<std::pair<int, std::string>, DailySeries> measured;
    measured[{84, "incid_hosp"}] = shifted_scaled(f, 2, 1.0, "incid_hosp", 84);
    measured[{11, "incid_rea"}] = shifted_scaled(f, 2, 1.0, "incid_rea", 11);
    const auto report = validate_all({{84, f}}, measured, spec);
    CHECK(report.fits.size() == 1);
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].first == "11/incid_rea");
  }
}

TEST_CASE("table exports") {
  const auto f = padded_model_f();
  std::vector<LagScaleFit> fits = {{84, "incid_hosp", 5, 3.430858, 1.5, 43},
                                   {84, "incid_dc", -3, 0.399725, 0.7, 40}};
  const auto csv = fits_to_csv(fits);
  CHECK(csv.find("eta_incid_hosp") != std::string::npos);
  CHECK(csv.find("\n84,") != std::string::npos);
  CHECK(csv.find("-3") != std::string::npos);
  const auto json = fits_to_json(fits);
  CHECK(json.find("\"n_overlap\": 40") != std::string::npos);
}
