#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace epifit::mds {

struct Box {
  std::vector<double> lower;  // -inf allowed
  std::vector<double> upper;  // +inf allowed

  static Box unbounded(std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    return Box{std::vector<double>(n, -inf), std::vector<double>(n, inf)};
  }
  bool contains(const std::vector<double>& x) const;
};

struct MdsConfig {
  double expansion = 2.0;
  double contraction = 0.5;
  double size_tol = 1e-8;  // relative to the initial simplex diameter
  long max_evals = 100000;
  std::vector<double> initial_steps;  // empty -> 0.1*|x0_j|, or 0.01 when x0_j == 0
};

enum class StopReason { size_tol, max_evals };

struct MdsResult {
  std::vector<double> x_best;
  double cost_best = std::numeric_limits<double>::infinity();
  long evals = 0;
  StopReason stop_reason = StopReason::max_evals;
};

struct TraceRow {
  long iteration;
  double best_cost;
  double simplex_diameter;
  long evals;
};

struct ZeroStep : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleStart : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Objective = std::function<double(const std::vector<double>&)>;
using TraceSink = std::function<void(const TraceRow&)>;

/// Axis-aligned initial simplex: vertex 0 = x0, vertex j = x0 + steps[j-1]*e_j.
std::vector<std::vector<double>> initial_simplex(const std::vector<double>& x0,
                                                 const std::vector<double>& steps);

/// Torczon multidirectional search. Points outside the box cost +inf and
/// are never accepted as best; the objective is only called on feasible
/// points and evals counts those calls exactly.
MdsResult minimize(const Objective& objective, const std::vector<double>& x0,
                   const Box& box, const MdsConfig& cfg,
                   const TraceSink& trace = nullptr);

std::string to_string(StopReason r);

}  // namespace epifit::mds
