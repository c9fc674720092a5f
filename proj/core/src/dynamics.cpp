#include "epifit/dynamics.hpp"

#include <cmath>

namespace epifit::dynamics {

Trajectory simulate(const GlobalParams& params, const RegionInit& init, int steps) {
  if (steps < 1) throw std::invalid_argument("simulate: steps must be >= 1");
  if (!(params.a > -1.0)) throw std::invalid_argument("simulate: a must be > -1");
  if (!(init.f0 > 0.0)) throw std::invalid_argument("simulate: f0 must be > 0");

  Trajectory t;
  t.f.reserve(static_cast<std::size_t>(steps) + 1);
  t.delta.reserve(static_cast<std::size_t>(steps) + 1);
  double f = init.f0;
  double delta = init.delta0;
  t.f.push_back(f);
  t.delta.push_back(delta);
  for (int k = 0; k < steps; ++k) {
    f = (1.0 + delta) * f;
    delta = (1.0 + params.a) * delta + params.u;
    if (!std::isfinite(f) || !std::isfinite(delta))
      throw NonFinite("simulate: trajectory left the finite range at step " +
                      std::to_string(k + 1));
    t.f.push_back(f);
    t.delta.push_back(delta);
  }
  return t;
}

double delta_closed_form(const GlobalParams& params, double delta0, int k) {
  if (k < 0) throw std::invalid_argument("delta_closed_form: k must be >= 0");
  if (params.a == 0.0) return delta0 + static_cast<double>(k) * params.u;
  const double growth = std::pow(1.0 + params.a, static_cast<double>(k));
  return growth * delta0 + params.u * (growth - 1.0) / params.a;
}

std::optional<int> peak_step(const GlobalParams& params, const RegionInit& init,
                             int max_steps) {
  if (max_steps < 1) throw std::invalid_argument("peak_step: max_steps must be >= 1");
  double delta = init.delta0;
  for (int k = 0; k <= max_steps; ++k) {
    if (delta < 0.0) return k;
    delta = (1.0 + params.a) * delta + params.u;
  }
  return std::nullopt;
}

}  // namespace epifit::dynamics
