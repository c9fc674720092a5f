#include "epifit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace epifit::svg {
namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_chart(const std::vector<ChartSeries>& series,
                         const ChartSpec& spec) {
  if (series.empty()) throw std::invalid_argument("render_chart: no series");

  Date t_min{};
  Date t_max{};
  double y_min = 0.0, y_max = 0.0;
  bool first = true;
  for (const auto& s : series) {
    if (s.data.empty()) throw std::invalid_argument("render_chart: empty series");
    if (first) {
      t_min = s.data.start;
      t_max = s.data.last_date();
      y_min = y_max = s.data.values.front();
      first = false;
    }
    t_min = std::min(t_min, s.data.start);
    t_max = std::max(t_max, s.data.last_date());
    for (double v : s.data.values) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (y_max == y_min) y_max = y_min + 1.0;
  const double t_span = std::max(1.0, static_cast<double>((t_max - t_min).count()));

  const double ml = 60, mr = 20, mt = 36, mb = 40;
  const double pw = spec.width - ml - mr;
  const double ph = spec.height - mt - mb;
  auto px = [&](Date t) {
    return ml + pw * static_cast<double>((t - t_min).count()) / t_span;
  };
  auto py = [&](double v) { return mt + ph * (1.0 - (v - y_min) / (y_max - y_min)); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) +
         "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
         std::to_string(spec.height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty())
    out += "<text x=\"" + num(spec.width / 2.0) +
           "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" +
           escape(spec.title) + "</text>\n";

  // Axes.
  out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" +
         num(ml + pw) + "\" y2=\"" + num(mt + ph) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) +
         "\" y2=\"" + num(mt + ph) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // Four y labels and three date labels.
  for (int i = 0; i <= 3; ++i) {
    const double v = y_min + (y_max - y_min) * i / 3.0;
    out += "<text x=\"" + num(ml - 6) + "\" y=\"" + num(py(v) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
           num(v) + "</text>\n";
  }
  for (int i = 0; i <= 2; ++i) {
    const Date t = t_min + std::chrono::days(static_cast<long>(t_span * i / 2.0));
    out += "<text x=\"" + num(px(t)) + "\" y=\"" + num(mt + ph + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
           format_date(t) + "</text>\n";
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    std::string points;
    for (std::size_t k = 0; k < s.data.size(); ++k) {
      if (k) points += ' ';
      points += num(px(s.data.date_at(k))) + "," + num(py(s.data.values[k]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[i % kPaletteSize]) +
           "\" stroke-width=\"" + (s.bold ? std::string("2.5") : std::string("1")) +
           "\" points=\"" + points + "\"/>\n";
    // Legend entry.
    const double ly = mt + 14.0 * static_cast<double>(i) + 4.0;
    out += "<line x1=\"" + num(ml + pw - 130) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(ml + pw - 110) + "\" y2=\"" + num(ly) + "\" stroke=\"" +
           kPalette[i % kPaletteSize] + "\" stroke-width=\"" +
           (s.bold ? std::string("2.5") : std::string("1")) + "\"/>\n";
    out += "<text x=\"" + num(ml + pw - 105) + "\" y=\"" + num(ly + 3) +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + escape(s.label) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace epifit::svg
