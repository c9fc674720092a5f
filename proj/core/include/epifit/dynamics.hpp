#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "epifit/series.hpp"

namespace epifit::dynamics {

/// The two parameters shared by all regions.
struct GlobalParams {
  double a = 0.0;  // 1/day
  double u = 0.0;  // 1/day^2
};

struct RegionInit {
  double f0 = 1.0;      // deaths/day, > 0
  double delta0 = 0.0;  // 1/day
};

struct Trajectory {
  std::vector<double> f;
  std::vector<double> delta;
  Date k0_date{};
};

struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs the two-state recursion
///   f(k+1)     = (1 + delta(k)) * f(k)
///   delta(k+1) = (1 + a) * delta(k) + u
/// for `steps` steps; output length is steps + 1. Throws NonFinite on
/// overflow.
Trajectory simulate(const GlobalParams& params, const RegionInit& init, int steps);

/// Analytic solution of the delta recursion:
///   (1+a)^k * delta0 + u * ((1+a)^k - 1) / a      (a != 0)
///   delta0 + k * u                                 (a == 0)
double delta_closed_form(const GlobalParams& params, double delta0, int k);

/// Smallest k with delta(k) < 0 (the step at which f peaks), or nullopt if
/// delta never crosses zero within max_steps.
std::optional<int> peak_step(const GlobalParams& params, const RegionInit& init,
                             int max_steps);

}  // namespace epifit::dynamics
