#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "epifit/identify.hpp"
#include "epifit/series.hpp"

namespace epifit::lagfit {

/// H(t) = mu * f(t - eta) over the overlap inside the comparison window.
struct LagScaleFit {
  int region = 0;
  std::string indicator;
  int eta = 0;       // days
  double mu = 0.0;   // >= 0
  double sse = 0.0;
  int n_overlap = 0;
};

struct LagSearchSpec {
  int eta_min = -10;
  int eta_max = 15;
  identify::FitWindow window;
};

struct EmptyOverlap : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateSource : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoFeasibleEta : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The nine indicators validated against the identified signal.
const std::vector<std::string>& validated_indicators();

struct MuFit {
  double mu = 0.0;
  double sse = 0.0;
  int n_overlap = 0;
};

/// Closed-form least-squares scale for a fixed lag, clamped at 0.
MuFit best_mu(const DailySeries& H, const DailySeries& f, int eta,
              const identify::FitWindow& window);

/// Scans every integer eta in range, selects by mean squared error,
/// ties broken by smaller |eta| then smaller eta.
LagScaleFit fit_lag_scale(const DailySeries& H, const DailySeries& f,
                          const LagSearchSpec& spec);

struct ValidationReport {
  std::vector<LagScaleFit> fits;                      // ordered by (region, indicator)
  std::vector<std::pair<std::string, std::string>> errors;  // (pair label, message)
};

ValidationReport validate_all(
    const std::map<int, DailySeries>& model_f,
    const std::map<std::pair<int, std::string>, DailySeries>& measured,
    const LagSearchSpec& spec);

/// Tables-style CSV: one row per region, (eta, mu) columns per indicator.
std::string fits_to_csv(const std::vector<LagScaleFit>& fits);
std::string fits_to_json(const std::vector<LagScaleFit>& fits);

}  // namespace epifit::lagfit
