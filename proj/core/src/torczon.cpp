#include "epifit/torczon.hpp"

#include <algorithm>
#include <cmath>

namespace epifit::mds {
namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double diameter(const std::vector<std::vector<double>>& vertices) {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      d = std::max(d, distance(vertices[i], vertices[j]));
  return d;
}

}  // namespace

bool Box::contains(const std::vector<double>& x) const {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] <= lower[i] || x[i] >= upper[i]) return false;
  return true;
}

std::vector<std::vector<double>> initial_simplex(const std::vector<double>& x0,
                                                 const std::vector<double>& steps) {
  if (steps.size() != x0.size())
    throw std::invalid_argument("initial_simplex: dimension mismatch");
  for (double s : steps)
    if (!(s > 0.0)) throw ZeroStep("initial_simplex: steps must be > 0");

  std::vector<std::vector<double>> vertices(x0.size() + 1, x0);
  for (std::size_t j = 0; j < x0.size(); ++j) vertices[j + 1][j] += steps[j];
  return vertices;
}

MdsResult minimize(const Objective& objective, const std::vector<double>& x0,
                   const Box& box, const MdsConfig& cfg, const TraceSink& trace) {
  const std::size_t n = x0.size();
  const double inf = std::numeric_limits<double>::infinity();

  MdsResult result;
  auto eval = [&](const std::vector<double>& x) {
    if (!box.contains(x)) return inf;
    ++result.evals;
    return objective(x);
  };

  std::vector<double> steps = cfg.initial_steps;
  if (steps.empty()) {
    steps.resize(n);
    for (std::size_t j = 0; j < n; ++j)
      steps[j] = x0[j] != 0.0 ? 0.1 * std::abs(x0[j]) : 0.01;
  }

  auto vertices = initial_simplex(x0, steps);
  std::vector<double> costs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) costs[i] = eval(vertices[i]);
  if (!std::isfinite(costs[0]))
    throw InfeasibleStart("minimize: objective(x0) is not finite");

  auto best_index = [&]() {
    std::size_t b = 0;
    for (std::size_t i = 1; i <= n; ++i)
      if (costs[i] < costs[b]) b = i;  // ties keep the lowest index
    return b;
  };

  const double initial_diameter = diameter(vertices);
  std::size_t best = best_index();
  long iteration = 0;
  result.stop_reason = StopReason::max_evals;

  std::vector<std::vector<double>> trial(n + 1);
  std::vector<double> trial_costs(n + 1);
  std::vector<std::vector<double>> expanded(n + 1);
  std::vector<double> expanded_costs(n + 1);

  while (true) {
    const double diam = diameter(vertices);
    if (trace) trace({iteration, costs[best], diam, result.evals});
    if (diam < cfg.size_tol * initial_diameter) {
      result.stop_reason = StopReason::size_tol;
      break;
    }
    if (result.evals + static_cast<long>(n) > cfg.max_evals) {
      result.stop_reason = StopReason::max_evals;
      break;
    }

    // Reflect every non-best vertex through the best one.
    double best_trial = inf;
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) {
        trial[i] = vertices[i];
        trial_costs[i] = costs[i];
        continue;
      }
      trial[i].resize(n);
      for (std::size_t j = 0; j < n; ++j)
        trial[i][j] = 2.0 * vertices[best][j] - vertices[i][j];
      trial_costs[i] = eval(trial[i]);
      best_trial = std::min(best_trial, trial_costs[i]);
    }

    if (best_trial < costs[best]) {
      // Reflection improved; try the expanded simplex if the budget allows.
      if (result.evals + static_cast<long>(n) <= cfg.max_evals) {
        double best_expanded = inf;
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) {
            expanded[i] = vertices[i];
            expanded_costs[i] = costs[i];
            continue;
          }
          expanded[i].resize(n);
          for (std::size_t j = 0; j < n; ++j)
            expanded[i][j] = vertices[best][j] +
                             cfg.expansion * (vertices[best][j] - vertices[i][j]);
          expanded_costs[i] = eval(expanded[i]);
          best_expanded = std::min(best_expanded, expanded_costs[i]);
        }
        if (best_expanded < best_trial) {
          vertices = expanded;
          costs = expanded_costs;
        } else {
          vertices = trial;
          costs = trial_costs;
        }
      } else {
        vertices = trial;
        costs = trial_costs;
      }
    } else {
      if (result.evals + static_cast<long>(n) > cfg.max_evals) {
        result.stop_reason = StopReason::max_evals;
        break;
      }
      // Contract toward the best vertex.
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        for (std::size_t j = 0; j < n; ++j)
          vertices[i][j] = vertices[best][j] +
                           cfg.contraction * (vertices[i][j] - vertices[best][j]);
        costs[i] = eval(vertices[i]);
      }
    }

    best = best_index();
    ++iteration;
  }

  result.x_best = vertices[best];
  result.cost_best = costs[best];
  return result;
}

std::string to_string(StopReason r) {
  return r == StopReason::size_tol ? "size_tol" : "max_evals";
}

}  // namespace epifit::mds
