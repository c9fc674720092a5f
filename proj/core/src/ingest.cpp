#include "epifit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace epifit::ingest {
namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == delim) {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::string strip_quotes(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

// Minimal date parser driven by the config's format string; supports
// %Y, %m, %d plus literal separators (covers the upstream file formats).
bool parse_date_with_format(const std::string& text, const std::string& format,
                            Date& out) {
  std::size_t ti = 0;
  int y = -1, m = -1, d = -1;
  auto read_int = [&](int width, int& dst) {
    int v = 0, n = 0;
    while (n < width && ti < text.size() && text[ti] >= '0' && text[ti] <= '9') {
      v = v * 10 + (text[ti] - '0');
      ++ti;
      ++n;
    }
    if (n == 0) return false;
    dst = v;
    return true;
  };
  for (std::size_t fi = 0; fi < format.size(); ++fi) {
    if (format[fi] == '%' && fi + 1 < format.size()) {
      ++fi;
      bool ok = false;
      switch (format[fi]) {
        case 'Y': ok = read_int(4, y); break;
        case 'm': ok = read_int(2, m); break;
        case 'd': ok = read_int(2, d); break;
        default: return false;
      }
      if (!ok) return false;
    } else {
      if (ti >= text.size() || text[ti] != format[fi]) return false;
      ++ti;
    }
  }
  if (ti != text.size() || y < 0 || m < 1 || d < 1) return false;
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;
  out = std::chrono::sys_days{ymd};
  return true;
}

const std::map<std::string, int>& region_name_codes() {
  static const std::map<std::string, int> names = {
      {"Ile-de-France", 11},
      {"Île-de-France", 11},
      {"Centre-Val de Loire", 24},
      {"Bourgogne-Franche-Comte", 27},
      {"Bourgogne-Franche-Comté", 27},
      {"Normandie", 28},
      {"Hauts-de-France", 32},
      {"Grand Est", 44},
      {"Pays de la Loire", 52},
      {"Bretagne", 53},
      {"Nouvelle-Aquitaine", 75},
      {"Occitanie", 76},
      {"Auvergne-Rhone-Alpes", 84},
      {"Auvergne-Rhône-Alpes", 84},
      {"Provence-Alpes-Cote d'Azur", 93},
      {"Provence-Alpes-Côte d'Azur", 93},
      {"Corse", 94}};
  return names;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

bool canonical_less(const CanonicalRecord& a, const CanonicalRecord& b) {
  if (a.region != b.region) return a.region < b.region;
  if (a.indicator != b.indicator) return a.indicator < b.indicator;
  return a.date < b.date;
}

SourceAdapterConfig load_adapter_config(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  SourceAdapterConfig cfg;
  cfg.source_id = j.at("source_id").get<std::string>();
  for (const auto& [key, value] : j.at("column_map").items())
    cfg.column_map[key] = value.get<std::string>();
  const auto delim = j.at("delimiter").get<std::string>();
  if (delim.size() != 1)
    throw std::invalid_argument("adapter config: delimiter must be one character");
  cfg.delimiter = delim[0];
  cfg.date_format = j.value("date_format", std::string("%Y-%m-%d"));
  const auto kind = j.value("region_column_kind", std::string("code"));
  if (kind == "code")
    cfg.region_column_kind = RegionColumnKind::code;
  else if (kind == "name")
    cfg.region_column_kind = RegionColumnKind::name;
  else
    throw std::invalid_argument("adapter config: bad region_column_kind: " + kind);
  if (!cfg.column_map.count("region")) throw MissingColumn("region");
  if (!cfg.column_map.count("date")) throw MissingColumn("date");
  return cfg;
}

SourceAdapterConfig load_adapter_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open adapter config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_adapter_config(ss.str());
}

ParseOutput parse_source(const std::string& raw_csv, const SourceAdapterConfig& config) {
  const auto lines = split_lines(raw_csv);
  if (lines.empty()) throw ParseError(1, "empty input, header row expected");

  const auto header = split_line(lines[0], config.delimiter);
  auto column_index = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (strip_quotes(header[i]) == name) return i;
    throw MissingColumn(name);
  };

  const std::size_t region_col = column_index(config.column_map.at("region"));
  const std::size_t date_col = column_index(config.column_map.at("date"));

  // Remaining column_map keys name the indicator each value column feeds.
  // insee_deaths carries a single "deces" key resolved per row by year.
  std::vector<std::pair<std::string, std::size_t>> value_cols;
  for (const auto& [key, col] : config.column_map) {
    if (key == "region" || key == "date") continue;
    if (key != "deces" && !is_source_indicator(key))
      throw std::invalid_argument("adapter config: unknown indicator key: " + key);
    value_cols.emplace_back(key, column_index(col));
  }
  if (value_cols.empty()) throw MissingColumn("value");

  ParseOutput out;
  std::set<std::tuple<int, std::string, Date>> seen;

  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty() || lines[row] == "\r") continue;
    const auto fields = split_line(lines[row], config.delimiter);
    const std::size_t needed =
        std::max({region_col, date_col, value_cols.back().second});
    if (fields.size() <= needed)
      throw ParseError(row + 1, "too few fields");

    int region = 0;
    const std::string region_text = strip_quotes(fields[region_col]);
    if (config.region_column_kind == RegionColumnKind::code) {
      try {
        region = std::stoi(region_text);
      } catch (const std::exception&) {
        throw ParseError(row + 1, "bad region code: " + region_text);
      }
    } else {
      auto it = region_name_codes().find(region_text);
      if (it == region_name_codes().end()) {
        ++out.dropped_regions;
        continue;
      }
      region = it->second;
    }
    if (!is_mainland_region(region)) {
      ++out.dropped_regions;
      continue;
    }

    Date date{};
    const std::string date_text = strip_quotes(fields[date_col]);
    if (!parse_date_with_format(date_text, config.date_format, date))
      throw BadDate(row + 1, date_text);

    for (const auto& [key, col] : value_cols) {
      const std::string cell = strip_quotes(fields[col]);
      if (cell.empty()) continue;
      double value = 0.0;
      if (!parse_double(cell, value))
        throw ParseError(row + 1, "bad value: " + cell);
      if (value < 0.0) throw NegativeValue(row + 1);

      std::string indicator = key;
      if (key == "deces") {
        const int year =
            static_cast<int>(std::chrono::year_month_day{date}.year());
        if (year < 2018 || year > 2020) continue;
        indicator = "deces_" + std::to_string(year);
      }
      if (!seen.insert({region, indicator, date}).second)
        throw DuplicateKey(region, indicator, date);
      out.records.push_back({region, indicator, date, value});
    }
  }
  return out;
}

DailySeries to_daily_series(const std::vector<CanonicalRecord>& records,
                            int region, const std::string& indicator) {
  std::vector<std::pair<Date, double>> points;
  for (const auto& r : records)
    if (r.region == region && r.indicator == indicator)
      points.emplace_back(r.date, r.value);
  if (points.empty()) throw NoData(region, indicator);
  std::sort(points.begin(), points.end());

  DailySeries s;
  s.region = region;
  s.indicator = indicator;
  s.start = points.front().first;
  const auto span = (points.back().first - points.front().first).count() + 1;
  s.values.assign(static_cast<std::size_t>(span),
                  std::numeric_limits<double>::quiet_NaN());
  for (const auto& [d, v] : points)
    s.values[static_cast<std::size_t>((d - s.start).count())] = v;

  // Interior gaps: linear interpolation between observed neighbours.
  std::size_t prev = 0;
  for (std::size_t k = 1; k < s.values.size(); ++k) {
    if (std::isnan(s.values[k])) continue;
    if (k > prev + 1) {
      const double lo = s.values[prev];
      const double hi = s.values[k];
      for (std::size_t j = prev + 1; j < k; ++j) {
        const double t = static_cast<double>(j - prev) / static_cast<double>(k - prev);
        s.values[j] = lo + t * (hi - lo);
        s.interpolated.push_back(j);
      }
    }
    prev = k;
  }
  return s;
}

std::string write_canonical(std::vector<CanonicalRecord> records) {
  std::sort(records.begin(), records.end(), canonical_less);
  std::string out = "region,indicator,date,value\n";
  for (const auto& r : records) {
    out += std::to_string(r.region);
    out += ',';
    out += r.indicator;
    out += ',';
    out += format_date(r.date);
    out += ',';
    out += format_value(r.value);
    out += '\n';
  }
  return out;
}

std::vector<CanonicalRecord> read_canonical(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || split_line(lines[0], ',') !=
                           std::vector<std::string>{"region", "indicator", "date", "value"})
    throw ParseError(1, "bad canonical header");

  std::vector<CanonicalRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i] == "\r") continue;
    const auto f = split_line(lines[i], ',');
    if (f.size() != 4) throw ParseError(i + 1, "expected 4 fields");
    CanonicalRecord r;
    try {
      r.region = std::stoi(f[0]);
      r.indicator = f[1];
      r.date = parse_iso_date(f[2]);
    } catch (const std::exception& e) {
      throw ParseError(i + 1, e.what());
    }
    if (!parse_double(f[3], r.value)) throw ParseError(i + 1, "bad value: " + f[3]);
    records.push_back(r);
  }
  return records;
}

std::vector<CanonicalRecord> read_canonical_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open canonical file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_canonical(ss.str());
}

void write_canonical_file(const std::string& path, std::vector<CanonicalRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write canonical file: " + path);
  out << write_canonical(std::move(records));
}

}  // namespace epifit::ingest
