#include "epifit/series_prep.hpp"

#include <algorithm>
#include <map>

namespace epifit::prep {
namespace {

struct MonthDay {
  unsigned month;
  unsigned day;
  bool operator<(const MonthDay& o) const {
    return month != o.month ? month < o.month : day < o.day;
  }
  bool operator==(const MonthDay& o) const {
    return month == o.month && day == o.day;
  }
};

MonthDay month_day(Date d) {
  const std::chrono::year_month_day ymd{d};
  return {static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day())};
}

std::map<MonthDay, double> by_month_day(const DailySeries& s) {
  std::map<MonthDay, double> out;
  for (std::size_t k = 0; k < s.size(); ++k)
    out[month_day(s.date_at(k))] = s.values[k];
  return out;
}

}  // namespace

DailySeries moving_average(const DailySeries& series, const SmoothingSpec& spec) {
  if (spec.window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  const long n = static_cast<long>(series.size());
  const long w = spec.window;

  DailySeries out = series;
  out.interpolated.clear();
  for (long k = 0; k < n; ++k) {
    long lo, hi;
    if (spec.alignment == Alignment::centered) {
      lo = k - (w - 1) / 2;
      hi = k + w / 2;
    } else {
      lo = k - w + 1;
      hi = k;
    }
    lo = std::max(lo, 0L);
    hi = std::min(hi, n - 1);
    double sum = 0.0;
    for (long j = lo; j <= hi; ++j) sum += series.values[static_cast<std::size_t>(j)];
    out.values[static_cast<std::size_t>(k)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

DailySeries excess_2020(const DailySeries& d2018, const DailySeries& d2019,
                        const DailySeries& d2020, const SmoothingSpec& spec) {
  const auto m18 = by_month_day(moving_average(d2018, spec));
  const auto m19 = by_month_day(moving_average(d2019, spec));
  const DailySeries s20 = moving_average(d2020, spec);

  const MonthDay feb29{2, 29};
  DailySeries out;
  out.region = d2020.region;
  out.indicator = "mean_excess20";

  std::vector<double> values;
  std::vector<std::size_t> flags;
  Date start{};
  bool started = false;
  bool pending_feb29 = false;

  for (std::size_t k = 0; k < s20.size(); ++k) {
    const Date d = s20.date_at(k);
    const MonthDay md = month_day(d);
    if (md == feb29) {
      if (started) pending_feb29 = true;
      continue;
    }
    const auto i18 = m18.find(md);
    const auto i19 = m19.find(md);
    if (i18 == m18.end() || i19 == m19.end()) {
      if (started) break;  // keep the output contiguous
      continue;
    }
    const double excess = s20.values[k] - 0.5 * (i18->second + i19->second);
    if (!started) {
      started = true;
      start = d;
    } else if (pending_feb29) {
      // Feb 29 inside the span: bridge it so dates stay contiguous.
      values.push_back(0.5 * (values.back() + excess));
      flags.push_back(values.size() - 1);
      pending_feb29 = false;
    }
    values.push_back(excess);
  }
  if (!started || values.empty())
    throw SpanMismatch("excess_2020: no common month-day overlap across years");

  out.start = start;
  out.values = std::move(values);
  out.interpolated = std::move(flags);
  return out;
}

namespace {

// Common span of two series; throws when they do not overlap.
std::pair<Date, Date> common_span(const DailySeries& a, const DailySeries& b,
                                  const char* who) {
  const Date lo = std::max(a.start, b.start);
  const Date hi = std::min(a.last_date(), b.last_date());
  if (lo > hi) throw SpanMismatch(std::string(who) + ": series do not overlap");
  return {lo, hi};
}

}  // namespace

DailySeries correct_excess(const DailySeries& mean_excess20,
                           const DailySeries& mean_incid_dc,
                           const LinearCorrection& corr) {
  const auto [lo, hi] = common_span(mean_excess20, mean_incid_dc, "correct_excess");

  DailySeries out;
  out.region = mean_excess20.region;
  out.indicator = "mean_excess20_corr";
  out.start = lo;
  const long n = (hi - lo).count() + 1;
  out.values.reserve(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) {
    const Date d = lo + std::chrono::days(k);
    const double corrected =
        mean_excess20.at(d) + corr.intercept + corr.slope * static_cast<double>(k);
    out.values.push_back(std::max(corrected, mean_incid_dc.at(d)));
  }
  return out;
}

LinearCorrection fit_linear_correction(const DailySeries& mean_excess20,
                                       const DailySeries& mean_incid_dc,
                                       int tail_days) {
  const auto [lo, hi] = common_span(mean_excess20, mean_incid_dc, "fit_linear_correction");
  const long n = (hi - lo).count() + 1;
  if (tail_days < 1 || tail_days > n)
    throw SpanMismatch("fit_linear_correction: tail_days exceeds the common span");

  // Simple regression of g(k) = max(0, incid_dc - excess) on k - k0 over
  // the final tail_days.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const long first = n - tail_days;
  for (long k = first; k < n; ++k) {
    const Date d = lo + std::chrono::days(k);
    const double g = std::max(0.0, mean_incid_dc.at(d) - mean_excess20.at(d));
    const double x = static_cast<double>(k);
    sx += x;
    sy += g;
    sxx += x * x;
    sxy += x * g;
  }
  const double m = static_cast<double>(tail_days);
  const double denom = m * sxx - sx * sx;
  LinearCorrection corr;
  if (tail_days == 1 || denom == 0.0) {
    corr.intercept = sy / m;
    corr.slope = 0.0;
  } else {
    corr.slope = (m * sxy - sx * sy) / denom;
    corr.intercept = (sy - corr.slope * sx) / m;
  }
  return corr;
}

}  // namespace epifit::prep
