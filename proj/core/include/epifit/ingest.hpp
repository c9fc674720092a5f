#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "epifit/series.hpp"

namespace epifit::ingest {

struct CanonicalRecord {
  int region = 0;
  std::string indicator;
  Date date{};
  double value = 0.0;

  friend bool operator==(const CanonicalRecord& a, const CanonicalRecord& b) {
    return a.region == b.region && a.indicator == b.indicator &&
           a.date == b.date && a.value == b.value;
  }
};

/// Canonical sort order: (region, indicator, date).
bool canonical_less(const CanonicalRecord& a, const CanonicalRecord& b);

enum class RegionColumnKind { code, name };

/// Column map keys: "region", "date", plus one key per indicator tag the
/// source carries, each mapped to the source column header. The
/// insee_deaths source maps a single "deces" key; the year of each row's
/// date selects deces_2018/2019/2020.
struct SourceAdapterConfig {
  std::string source_id;  // insee_deaths, hosp_incidence, inserm_cert, tests, emergency_sos
  std::map<std::string, std::string> column_map;
  char delimiter = ';';
  std::string date_format = "%Y-%m-%d";
  RegionColumnKind region_column_kind = RegionColumnKind::code;
};

SourceAdapterConfig load_adapter_config(const std::string& json_text);
SourceAdapterConfig load_adapter_config_file(const std::string& path);

struct ParseOutput {
  std::vector<CanonicalRecord> records;
  std::size_t dropped_regions = 0;  // rows outside the 13 mainland codes
};

struct MissingColumn : std::runtime_error {
  explicit MissingColumn(const std::string& name)
      : std::runtime_error("missing column: " + name), column(name) {}
  std::string column;
};
struct BadDate : std::runtime_error {
  BadDate(std::size_t row_, const std::string& text)
      : std::runtime_error("row " + std::to_string(row_) + ": bad date '" + text + "'"),
        row(row_) {}
  std::size_t row;
};
struct NegativeValue : std::runtime_error {
  explicit NegativeValue(std::size_t row_)
      : std::runtime_error("row " + std::to_string(row_) + ": negative value"),
        row(row_) {}
  std::size_t row;
};
struct DuplicateKey : std::runtime_error {
  DuplicateKey(int region, const std::string& indicator, Date date)
      : std::runtime_error("duplicate key: region " + std::to_string(region) +
                           ", " + indicator + ", " + format_date(date)) {}
};
struct NoData : std::runtime_error {
  NoData(int region, const std::string& indicator)
      : std::runtime_error("no data for region " + std::to_string(region) +
                           ", indicator " + indicator) {}
};
struct ParseError : std::runtime_error {
  ParseError(std::size_t line_, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what),
        line(line_) {}
  std::size_t line;
};

ParseOutput parse_source(const std::string& raw_csv, const SourceAdapterConfig& config);

/// Gap-free series over the observed span; interior gaps linearly
/// interpolated and flagged. Throws NoData when nothing matches.
DailySeries to_daily_series(const std::vector<CanonicalRecord>& records,
                            int region, const std::string& indicator);

std::string write_canonical(std::vector<CanonicalRecord> records);
std::vector<CanonicalRecord> read_canonical(const std::string& text);

std::vector<CanonicalRecord> read_canonical_file(const std::string& path);
void write_canonical_file(const std::string& path, std::vector<CanonicalRecord> records);

}  // namespace epifit::ingest
