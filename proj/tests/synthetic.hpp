#pragma once

// Shared synthetic-data helpers for the test suites: a reference optimum
// of the joint fit (two shared parameters plus 13 per-region initial
// conditions) and generators for noise-free and noisy regional datasets.

#include <map>
#include <random>

#include "epifit/dynamics.hpp"
#include "epifit/identify.hpp"

namespace testutil {

inline const epifit::dynamics::GlobalParams kReferenceParams{-7.1139e-2, -6.2489e-3};

inline const std::map<int, epifit::dynamics::RegionInit>& reference_inits() {
  static const std::map<int, epifit::dynamics::RegionInit> inits = {
      {11, {37.0938, 0.3211}}, {24, {1.7143, 0.3598}}, {27, {6.277, 0.2667}},
      {28, {1.2857, 0.3737}},  {32, {7.9161, 0.3032}}, {44, {42.8393, 0.2054}},
      {52, {2.3189, 0.3088}},  {53, {1.8857, 0.2284}}, {75, {1.0, 0.3167}},
      {76, {3.4643, 0.295}},   {84, {7.0714, 0.3221}}, {93, {5.2883, 0.2923}},
      {94, {1.3255, 0.1204}}};
  return inits;
}

/// Noise-free 13-region dataset over the fit window.
inline epifit::identify::RegionSeries synthetic_dataset(
    const epifit::identify::FitWindow& window = {}) {
  epifit::identify::RegionSeries data;
  for (const auto& [region, init] : reference_inits()) {
    const auto traj =
        epifit::dynamics::simulate(kReferenceParams, init, window.length() - 1);
    epifit::DailySeries s;
    s.region = region;
    s.indicator = "mean_excess20_corr";
    s.start = window.k0_date;
    s.values = traj.f;
    data[region] = std::move(s);
  }
  return data;
}

/// Same dataset under multiplicative i.i.d. Gaussian noise.
inline epifit::identify::RegionSeries noisy_dataset(double rel_sigma,
                                                    unsigned seed) {
  auto data = synthetic_dataset();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, rel_sigma);
  for (auto& [region, series] : data)
    for (double& v : series.values) v *= 1.0 + gauss(rng);
  return data;
}

}  // namespace testutil
