#include "epifit/lagfit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <json.hpp>

namespace epifit::lagfit {

const std::vector<std::string>& validated_indicators() {
  static const std::vector<std::string> tags = {
      "incid_hosp",       "incid_rea",          "incid_dc",
      "incid_rad",        "pos",                "incid_inserm",
      "nbre_pass_corona", "nbre_hospit_corona", "nbre_acte_corona"};
  return tags;
}

MuFit best_mu(const DailySeries& H, const DailySeries& f, int eta,
              const identify::FitWindow& window) {
  std::vector<std::pair<double, double>> overlap;  // (H(t), f(t - eta))
  for (Date t = window.k0_date; t <= window.kf_date; t += std::chrono::days(1)) {
    const Date src = t - std::chrono::days(eta);
    if (!H.has(t) || !f.has(src)) continue;
    overlap.emplace_back(H.at(t), f.at(src));
  }
  if (overlap.empty())
    throw EmptyOverlap("best_mu: no overlap at eta " + std::to_string(eta));

  double sff = 0.0, shf = 0.0;
  for (const auto& [h, fv] : overlap) {
    sff += fv * fv;
    shf += h * fv;
  }
  if (sff == 0.0)
    throw DegenerateSource("best_mu: shifted source is all zero at eta " +
                           std::to_string(eta));

  MuFit fit;
  fit.mu = std::max(0.0, shf / sff);
  for (const auto& [h, fv] : overlap) {
    const double r = h - fit.mu * fv;
    fit.sse += r * r;
  }
  fit.n_overlap = static_cast<int>(overlap.size());
  return fit;
}

LagScaleFit fit_lag_scale(const DailySeries& H, const DailySeries& f,
                          const LagSearchSpec& spec) {
  if (spec.eta_min > spec.eta_max)
    throw std::invalid_argument("fit_lag_scale: eta_min > eta_max");

  bool found = false;
  LagScaleFit best{};
  double best_mse = 0.0;
  for (int eta = spec.eta_min; eta <= spec.eta_max; ++eta) {
    MuFit fit;
    try {
      fit = best_mu(H, f, eta, spec.window);
    } catch (const EmptyOverlap&) {
      continue;
    } catch (const DegenerateSource&) {
      continue;
    }
    const double mse = fit.sse / static_cast<double>(fit.n_overlap);
    const bool better =
        !found || mse < best_mse ||
        (mse == best_mse && (std::abs(eta) < std::abs(best.eta) ||
                             (std::abs(eta) == std::abs(best.eta) && eta < best.eta)));
    if (better) {
      found = true;
      best_mse = mse;
      best.eta = eta;
      best.mu = fit.mu;
      best.sse = fit.sse;
      best.n_overlap = fit.n_overlap;
    }
  }
  if (!found) throw NoFeasibleEta("fit_lag_scale: no eta in range has a valid overlap");
  best.region = H.region;
  best.indicator = H.indicator;
  return best;
}

ValidationReport validate_all(
    const std::map<int, DailySeries>& model_f,
    const std::map<std::pair<int, std::string>, DailySeries>& measured,
    const LagSearchSpec& spec) {
  ValidationReport report;
  for (const auto& [key, H] : measured) {
    const auto& [region, indicator] = key;
    const std::string label = std::to_string(region) + "/" + indicator;
    const auto f_it = model_f.find(region);
    if (f_it == model_f.end()) {
      report.errors.emplace_back(label, "no model series for region");
      continue;
    }
    try {
      auto fit = fit_lag_scale(H, f_it->second, spec);
      fit.region = region;
      fit.indicator = indicator;
      report.fits.push_back(fit);
    } catch (const std::exception& e) {
      report.errors.emplace_back(label, e.what());
    }
  }
  // measured is already ordered by (region, indicator)
  return report;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string fits_to_csv(const std::vector<LagScaleFit>& fits) {
  std::set<std::string> indicator_set;
  std::set<int> regions;
  for (const auto& f : fits) {
    indicator_set.insert(f.indicator);
    regions.insert(f.region);
  }
  // Keep the canonical indicator order where applicable.
  std::vector<std::string> indicators;
  for (const auto& tag : validated_indicators())
    if (indicator_set.count(tag)) indicators.push_back(tag);
  for (const auto& tag : indicator_set)
    if (std::find(indicators.begin(), indicators.end(), tag) == indicators.end())
      indicators.push_back(tag);

  std::map<std::pair<int, std::string>, const LagScaleFit*> cell;
  for (const auto& f : fits) cell[{f.region, f.indicator}] = &f;

  std::string out = "region";
  for (const auto& tag : indicators) out += ",eta_" + tag + ",mu_" + tag;
  out += '\n';
  for (int r : regions) {
    out += std::to_string(r);
    for (const auto& tag : indicators) {
      const auto it = cell.find({r, tag});
      if (it == cell.end()) {
        out += ",,";
      } else {
        out += ',' + std::to_string(it->second->eta) + ',' + fmt(it->second->mu);
      }
    }
    out += '\n';
  }
  return out;
}

std::string fits_to_json(const std::vector<LagScaleFit>& fits) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& f : fits) {
    arr.push_back({{"region", f.region},
                   {"indicator", f.indicator},
                   {"eta", f.eta},
                   {"mu", f.mu},
                   {"sse", f.sse},
                   {"n_overlap", f.n_overlap}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace epifit::lagfit
