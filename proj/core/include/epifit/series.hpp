#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace epifit {

using Date = std::chrono::sys_days;

/// The 13 INSEE codes of mainland-France regions.
inline constexpr std::array<int, 13> kMainlandRegions = {
    11, 24, 27, 28, 32, 44, 52, 53, 75, 76, 84, 93, 94};

inline bool is_mainland_region(int code) {
  for (int c : kMainlandRegions)
    if (c == code) return true;
  return false;
}

/// Source indicator tags as they appear in the upstream files.
inline const std::vector<std::string>& source_indicators() {
  static const std::vector<std::string> tags = {
      "deces_2018",       "deces_2019",         "deces_2020",
      "incid_hosp",       "incid_rea",          "incid_dc",
      "incid_rad",        "incid_inserm",       "test",
      "pos",              "nbre_pass_tot",      "nbre_pass_corona",
      "nbre_hospit_corona", "nbre_acte_tot",    "nbre_acte_corona"};
  return tags;
}

inline bool is_source_indicator(const std::string& tag) {
  for (const auto& t : source_indicators())
    if (t == tag) return true;
  return false;
}

/// Derived tags written by the preprocessing stage.
inline bool is_derived_indicator(const std::string& tag) {
  return tag == "mean_excess20" || tag == "mean_incid_dc" ||
         tag == "mean_inserm" || tag == "mean_excess20_corr" ||
         tag == "fhat" || tag == "delta";
}

inline bool is_known_indicator(const std::string& tag) {
  return is_source_indicator(tag) || is_derived_indicator(tag);
}

inline Date make_date(int y, unsigned m, unsigned d) {
  return std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{m} /
                               std::chrono::day{d}};
}

std::string format_date(Date d);                 // ISO 8601
Date parse_iso_date(const std::string& text);    // throws std::invalid_argument

/// Contiguous daily values for one region and one indicator tag.
struct DailySeries {
  int region = 0;
  std::string indicator;
  Date start{};
  std::vector<double> values;
  std::vector<std::size_t> interpolated;  // indices filled by interpolation

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  Date date_at(std::size_t k) const { return start + std::chrono::days(static_cast<long>(k)); }
  Date last_date() const { return date_at(values.size() - 1); }

  /// Value at a calendar date, or nullopt-like via has()/at().
  bool has(Date d) const {
    return !values.empty() && d >= start && d <= last_date();
  }
  double at(Date d) const {
    return values[static_cast<std::size_t>((d - start).count())];
  }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

struct SpanMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace epifit
