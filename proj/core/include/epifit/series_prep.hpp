#pragma once

#include "epifit/series.hpp"

namespace epifit::prep {

enum class Alignment { centered, trailing };

struct SmoothingSpec {
  int window = 14;
  Alignment alignment = Alignment::centered;
};

/// Offset applied to the excess series before the max with mean_incid_dc.
/// Coordinates are days since the start of the comparison window.
struct LinearCorrection {
  double intercept = 0.0;  // deaths/day at window start
  double slope = 0.0;      // deaths/day per day
};

/// Boundary-truncated moving average; same dates and length as the input.
DailySeries moving_average(const DailySeries& series, const SmoothingSpec& spec);

/// Smoothed 2020 deaths minus the smoothed 2018/2019 average, aligned by
/// month-and-day. Feb 29 is removed from the smoothed 2020 series before
/// alignment; if it sits strictly inside the aligned span the output keeps
/// the date contiguous by averaging its neighbours (flagged interpolated).
DailySeries excess_2020(const DailySeries& d2018, const DailySeries& d2019,
                        const DailySeries& d2020, const SmoothingSpec& spec);

/// Pointwise max(excess + intercept + slope*(k - k0), incid_dc) over the
/// common span of the two inputs.
DailySeries correct_excess(const DailySeries& mean_excess20,
                           const DailySeries& mean_incid_dc,
                           const LinearCorrection& corr);

/// Least-squares line through the positive gap
/// g(k) = max(0, incid_dc(k) - excess(k)) over the final tail_days of the
/// common span, expressed in (k - k0) coordinates.
LinearCorrection fit_linear_correction(const DailySeries& mean_excess20,
                                       const DailySeries& mean_incid_dc,
                                       int tail_days = 14);

}  // namespace epifit::prep
