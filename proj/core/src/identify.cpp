#include "epifit/identify.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace epifit::identify {

DailySeries empirical_delta(const DailySeries& f) {
  if (f.size() < 2)
    throw std::invalid_argument("empirical_delta: need at least 2 points");
  DailySeries out;
  out.region = f.region;
  out.indicator = "delta";
  out.start = f.start;
  out.values.reserve(f.size() - 1);
  for (std::size_t k = 0; k + 1 < f.size(); ++k) {
    if (!(f.values[k] > 0.0))
      throw NonPositiveValue("empirical_delta: non-positive value at index " +
                             std::to_string(k));
    out.values.push_back(f.values[k + 1] / f.values[k] - 1.0);
  }
  return out;
}

std::pair<GlobalParams, std::map<int, double>> convex_warm_start(
    const RegionSeries& deltas) {
  // Pooled regression delta(k+1) = p*delta(k) + u over all regions.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long m = 0;
  for (const auto& [region, series] : deltas) {
    if (series.size() < 3)
      throw std::invalid_argument("convex_warm_start: region " +
                                  std::to_string(region) + " has < 3 delta samples");
    for (std::size_t k = 0; k + 1 < series.size(); ++k) {
      const double x = series.values[k];
      const double y = series.values[k + 1];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
  }
  const double denom = static_cast<double>(m) * sxx - sx * sx;
  if (denom == 0.0)
    throw DegenerateRegression("convex_warm_start: all delta samples are equal");
  const double p = (static_cast<double>(m) * sxy - sx * sy) / denom;
  const double u = (sy - p * sx) / static_cast<double>(m);

  std::map<int, double> delta0;
  for (const auto& [region, series] : deltas) delta0[region] = series.values.front();
  return {GlobalParams{p - 1.0, u}, delta0};
}

double objective(const GlobalParams& params, const std::map<int, RegionInit>& inits,
                 const RegionSeries& data, const RegionWeights& weights) {
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const auto& [region, series] : data) {
    const auto init_it = inits.find(region);
    const auto q_it = weights.q.find(region);
    if (init_it == inits.end() || q_it == weights.q.end())
      throw std::invalid_argument("objective: region " + std::to_string(region) +
                                  " lacks an init or a weight");
    dynamics::Trajectory traj;
    try {
      traj = dynamics::simulate(params, init_it->second,
                                static_cast<int>(series.size()) - 1);
    } catch (const dynamics::NonFinite&) {
      return inf;
    } catch (const std::invalid_argument&) {
      return inf;
    }
    double ssr = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double r = traj.f[k] - series.values[k];
      ssr += r * r;
    }
    total += q_it->second * ssr;
    if (!std::isfinite(total)) return inf;
  }
  return total;
}

RegionWeights default_weights(const RegionSeries& data) {
  RegionWeights w;
  for (const auto& [region, series] : data) {
    const double mx = *std::max_element(series.values.begin(), series.values.end());
    if (!(mx > 0.0))
      throw NonPositiveMax("default_weights: region " + std::to_string(region) +
                           " has non-positive maximum");
    w.q[region] = 1.0 / (mx * mx);
  }
  return w;
}

RegionSeries clip_to_window(const RegionSeries& data, const FitWindow& window) {
  RegionSeries out;
  for (const auto& [region, series] : data) {
    if (!series.has(window.k0_date) || !series.has(window.kf_date))
      throw SpanMismatch("region " + std::to_string(region) +
                         " does not cover the fit window");
    DailySeries clipped;
    clipped.region = series.region;
    clipped.indicator = series.indicator;
    clipped.start = window.k0_date;
    const auto offset = static_cast<std::size_t>((window.k0_date - series.start).count());
    clipped.values.assign(series.values.begin() + static_cast<long>(offset),
                          series.values.begin() + static_cast<long>(offset) +
                              window.length());
    out[region] = std::move(clipped);
  }
  return out;
}

namespace {

// Variable layout: (a, u, delta0 per region, f0 per region), regions in
// ascending code order.
struct Packing {
  std::vector<int> regions;

  std::size_t dim() const { return 2 + 2 * regions.size(); }

  std::vector<double> pack(const GlobalParams& params,
                           const std::map<int, RegionInit>& inits) const {
    std::vector<double> x;
    x.reserve(dim());
    x.push_back(params.a);
    x.push_back(params.u);
    for (int r : regions) x.push_back(inits.at(r).delta0);
    for (int r : regions) x.push_back(inits.at(r).f0);
    return x;
  }

  void unpack(const std::vector<double>& x, GlobalParams& params,
              std::map<int, RegionInit>& inits) const {
    params.a = x[0];
    params.u = x[1];
    const std::size_t R = regions.size();
    for (std::size_t i = 0; i < R; ++i) {
      inits[regions[i]].delta0 = x[2 + i];
      inits[regions[i]].f0 = x[2 + R + i];
    }
  }
};

}  // namespace

IdentifiedModel identify(const RegionSeries& data, const FitWindow& window,
                         const RegionWeights& weights, const mds::MdsConfig& cfg,
                         const mds::TraceSink& trace) {
  const RegionSeries clipped = clip_to_window(data, window);

  Packing packing;
  for (const auto& [region, series] : clipped) {
    if (!(series.values.front() > 0.0))
      throw NonPositiveValue("identify: region " + std::to_string(region) +
                             " has non-positive data at k0");
    packing.regions.push_back(region);
  }

  RegionSeries deltas;
  for (const auto& [region, series] : clipped)
    deltas[region] = empirical_delta(series);
  const auto [warm_params, warm_delta0] = convex_warm_start(deltas);

  std::map<int, RegionInit> warm_inits;
  for (int r : packing.regions)
    warm_inits[r] = RegionInit{std::max(clipped.at(r).values.front(), kF0Floor),
                               warm_delta0.at(r)};

  mds::Box box;
  box.lower = {-0.99, -1.0};
  box.upper = {0.99, 1.0};
  for (std::size_t i = 0; i < packing.regions.size(); ++i) {
    box.lower.push_back(-0.99);
    box.upper.push_back(2.0);
  }
  for (int r : packing.regions) {
    const auto& v = clipped.at(r).values;
    box.lower.push_back(kF0Floor);
    box.upper.push_back(10.0 * *std::max_element(v.begin(), v.end()));
  }

  const auto x0 = packing.pack(warm_params, warm_inits);
  auto cost_fn = [&](const std::vector<double>& x) {
    GlobalParams p;
    std::map<int, RegionInit> inits;
    packing.unpack(x, p, inits);
    return objective(p, inits, clipped, weights);
  };

  // Restart loop: each round rebuilds a fresh axis-aligned simplex at the
  // current best, which re-expands the steps the previous round contracted
  // away. On this ill-conditioned 28-variable problem a single simplex run
  // stalls far from the optimum; restarts recover most of the remaining
  // progress at no extra budget.
  std::vector<double> x = x0;
  double cost = std::numeric_limits<double>::infinity();
  long evals_used = 0;
  while (evals_used < cfg.max_evals) {
    mds::MdsConfig round_cfg = cfg;
    round_cfg.max_evals = std::min(cfg.max_evals - evals_used, 100000L);
    const auto result = mds::minimize(cost_fn, x, box, round_cfg, trace);
    evals_used += result.evals;
    const bool stalled = result.cost_best >= cost * (1.0 - 1e-9);
    if (result.cost_best < cost) {
      cost = result.cost_best;
      x = result.x_best;
    }
    if (stalled) break;
  }

  IdentifiedModel model;
  packing.unpack(x, model.params, model.inits);
  model.window = window;
  model.weights = weights;
  model.cost = cost;
  model.solver_evals = evals_used;
  model.solver_config = cfg;
  return model;
}

std::string to_json(const IdentifiedModel& model) {
  nlohmann::ordered_json j;
  j["a"] = model.params.a;
  j["u"] = model.params.u;
  j["window"] = {{"k0", format_date(model.window.k0_date)},
                 {"kf", format_date(model.window.kf_date)}};
  nlohmann::ordered_json regions;
  for (const auto& [code, init] : model.inits) {
    regions[std::to_string(code)] = {{"delta0", init.delta0},
                                     {"f0", init.f0},
                                     {"q", model.weights.q.at(code)}};
  }
  j["regions"] = regions;
  j["cost"] = model.cost;
  j["evals"] = model.solver_evals;
  j["solver"] = {{"expansion", model.solver_config.expansion},
                 {"contraction", model.solver_config.contraction},
                 {"size_tol", model.solver_config.size_tol},
                 {"max_evals", model.solver_config.max_evals}};
  return j.dump(2) + "\n";
}

IdentifiedModel model_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  IdentifiedModel model;
  model.params.a = j.at("a").get<double>();
  model.params.u = j.at("u").get<double>();
  model.window.k0_date = parse_iso_date(j.at("window").at("k0").get<std::string>());
  model.window.kf_date = parse_iso_date(j.at("window").at("kf").get<std::string>());
  for (const auto& [code, obj] : j.at("regions").items()) {
    const int r = std::stoi(code);
    model.inits[r] = RegionInit{obj.at("f0").get<double>(),
                                obj.at("delta0").get<double>()};
    model.weights.q[r] = obj.at("q").get<double>();
  }
  model.cost = j.at("cost").get<double>();
  model.solver_evals = j.at("evals").get<long>();
  if (j.contains("solver")) {
    model.solver_config.expansion = j["solver"].value("expansion", 2.0);
    model.solver_config.contraction = j["solver"].value("contraction", 0.5);
    model.solver_config.size_tol = j["solver"].value("size_tol", 1e-8);
    model.solver_config.max_evals = j["solver"].value("max_evals", 100000L);
  }
  return model;
}

}  // namespace epifit::identify
