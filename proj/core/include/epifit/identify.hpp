#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "epifit/dynamics.hpp"
#include "epifit/series.hpp"
#include "epifit/torczon.hpp"

namespace epifit::identify {

using dynamics::GlobalParams;
using dynamics::RegionInit;

struct FitWindow {
  Date k0_date = make_date(2020, 3, 17);
  Date kf_date = make_date(2020, 4, 28);

  int length() const {  // number of daily samples, inclusive
    return static_cast<int>((kf_date - k0_date).count()) + 1;
  }
};

struct RegionWeights {
  std::map<int, double> q;
};

struct IdentifiedModel {
  GlobalParams params;
  std::map<int, RegionInit> inits;
  FitWindow window;
  RegionWeights weights;
  double cost = 0.0;
  long solver_evals = 0;
  mds::MdsConfig solver_config;
};

using RegionSeries = std::map<int, DailySeries>;

struct NonPositiveValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateRegression : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonPositiveMax : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inverts the f-recursion: delta_hat(k) = f(k+1)/f(k) - 1.
DailySeries empirical_delta(const DailySeries& f);

/// Pooled linear least squares on delta_hat(k+1) = p*delta_hat(k) + u over
/// all regions; a = p - 1, delta0_i = delta_hat_i(first sample).
std::pair<GlobalParams, std::map<int, double>> convex_warm_start(
    const RegionSeries& deltas);

/// Weighted sum of squared residuals of the simulated trajectories against
/// the data over the window; +inf when a simulated value is non-finite.
double objective(const GlobalParams& params, const std::map<int, RegionInit>& inits,
                 const RegionSeries& data, const RegionWeights& weights);

/// q_i = 1 / (max_k data_i(k))^2.
RegionWeights default_weights(const RegionSeries& data);

/// Lower bound for the f0 box; small regions have optima with f0 near 1,
/// so a sub-unit floor keeps them strictly inside.
inline constexpr double kF0Floor = 0.5;

/// Joint identification of (a, u) and the per-region initial conditions,
/// 2 + 2R variables, warm-started from the convex delta regression.
IdentifiedModel identify(const RegionSeries& data, const FitWindow& window,
                         const RegionWeights& weights, const mds::MdsConfig& cfg,
                         const mds::TraceSink& trace = nullptr);

/// Restrict each region's series to the window (throws SpanMismatch when a
/// region does not cover it).
RegionSeries clip_to_window(const RegionSeries& data, const FitWindow& window);

std::string to_json(const IdentifiedModel& model);
IdentifiedModel model_from_json(const std::string& text);

}  // namespace epifit::identify
