#pragma once

#include <string>
#include <vector>

#include "epifit/series.hpp"

namespace epifit::svg {

struct ChartSeries {
  std::string label;
  DailySeries data;
  bool bold = false;  // smoothed series are drawn bold
};

struct ChartSpec {
  std::string title;
  int width = 800;
  int height = 480;
};

/// Deterministic multi-line SVG chart with a date axis and a legend.
/// Identical inputs produce identical bytes.
std::string render_chart(const std::vector<ChartSeries>& series,
                         const ChartSpec& spec);

}  // namespace epifit::svg
