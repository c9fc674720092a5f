// epifit - pipeline driver: ingest open-data CSV files, build corrected
// excess-death series, identify the two-parameter regional model, validate
// it against other indicators, and emit SVG charts.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "epifit/identify.hpp"
#include "epifit/ingest.hpp"
#include "epifit/lagfit.hpp"
#include "epifit/series_prep.hpp"
#include "epifit/svg.hpp"

namespace fs = std::filesystem;
using namespace epifit;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct CliError : std::runtime_error {
  CliError(int code_, const std::string& what) : std::runtime_error(what), code(code_) {}
  int code;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitInput, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(kExitInput, "cannot write " + path);
  out << content;
}

prep::SmoothingSpec parse_smooth(const std::string& text) {
  const auto colon = text.find(':');
  prep::SmoothingSpec spec;
  try {
    spec.window = std::stoi(text.substr(0, colon));
  } catch (const std::exception&) {
    throw CliError(kExitInput, "bad --smooth value: " + text);
  }
  if (spec.window < 1) throw CliError(kExitInput, "smoothing window must be >= 1");
  if (colon != std::string::npos) {
    const auto align = text.substr(colon + 1);
    if (align == "centered")
      spec.alignment = prep::Alignment::centered;
    else if (align == "trailing")
      spec.alignment = prep::Alignment::trailing;
    else
      throw CliError(kExitInput, "bad smoothing alignment: " + align);
  }
  return spec;
}

identify::FitWindow parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw CliError(kExitInput, "--window expects <start>:<end>");
  identify::FitWindow w;
  try {
    w.k0_date = parse_iso_date(text.substr(0, colon));
    w.kf_date = parse_iso_date(text.substr(colon + 1));
  } catch (const std::exception& e) {
    throw CliError(kExitInput, std::string("bad --window: ") + e.what());
  }
  if (w.kf_date <= w.k0_date)
    throw CliError(kExitInput, "--window end must be after start");
  return w;
}

// Shared pipeline options, settable from a JSON config and overridden by
// per-command flags.
struct PipelineOptions {
  std::string smooth = "14:centered";
  std::string window = "2020-03-17:2020-04-28";
  int tail_days = 14;
  int eta_min = -10;
  int eta_max = 15;
  long max_evals = 200000;
  double size_tol = 1e-8;
  std::vector<int> regions;  // empty = all present
};

void apply_config_file(PipelineOptions& opt, const std::string& path) {
  const auto j = nlohmann::json::parse(read_file(path));
  opt.smooth = j.value("smooth", opt.smooth);
  opt.window = j.value("window", opt.window);
  opt.tail_days = j.value("tail_days", opt.tail_days);
  opt.eta_min = j.value("eta_min", opt.eta_min);
  opt.eta_max = j.value("eta_max", opt.eta_max);
  opt.max_evals = j.value("max_evals", opt.max_evals);
  opt.size_tol = j.value("size_tol", opt.size_tol);
  if (j.contains("regions")) opt.regions = j["regions"].get<std::vector<int>>();
}

bool region_selected(const PipelineOptions& opt, int region) {
  if (opt.regions.empty()) return true;
  for (int r : opt.regions)
    if (r == region) return true;
  return false;
}

std::vector<ingest::CanonicalRecord> load_inputs(const std::vector<std::string>& paths) {
  std::vector<ingest::CanonicalRecord> all;
  for (const auto& path : paths) {
    auto recs = ingest::read_canonical(read_file(path));
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return all;
}

std::set<int> regions_present(const std::vector<ingest::CanonicalRecord>& records,
                              const std::string& indicator) {
  std::set<int> out;
  for (const auto& r : records)
    if (r.indicator == indicator) out.insert(r.region);
  return out;
}

void append_series(std::vector<ingest::CanonicalRecord>& records,
                   const DailySeries& s) {
  for (std::size_t k = 0; k < s.size(); ++k)
    records.push_back({s.region, s.indicator, s.date_at(k), s.values[k]});
}

DailySeries clip(const DailySeries& s, const identify::FitWindow& w) {
  if (!s.has(w.k0_date) || !s.has(w.kf_date))
    throw CliError(kExitInput, "series " + s.indicator + " for region " +
                                   std::to_string(s.region) +
                                   " does not cover the window");
  DailySeries out;
  out.region = s.region;
  out.indicator = s.indicator;
  out.start = w.k0_date;
  for (int k = 0; k < w.length(); ++k)
    out.values.push_back(s.at(w.k0_date + std::chrono::days(k)));
  return out;
}

// ---- subcommand bodies ----------------------------------------------------

int cmd_ingest(const std::vector<std::string>& configs,
               const std::vector<std::string>& inputs, const std::string& out_dir) {
  if (configs.size() != inputs.size())
    throw CliError(kExitInput, "--config and --input must be paired");
  struct Job {
    ingest::SourceAdapterConfig cfg;
    ingest::ParseOutput parsed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    Job job;
    try {
      job.cfg = ingest::load_adapter_config(read_file(configs[i]));
      job.parsed = ingest::parse_source(read_file(inputs[i]), job.cfg);
    } catch (const CliError&) {
      throw;
    } catch (const std::exception& e) {
      throw CliError(kExitInput, inputs[i] + ": " + e.what());
    }
    jobs.push_back(std::move(job));
  }
  for (const auto& job : jobs) {
    const auto path = (fs::path(out_dir) / (job.cfg.source_id + ".csv")).string();
    write_file(path, ingest::write_canonical(job.parsed.records));
    std::cout << job.cfg.source_id << ": " << job.parsed.records.size()
              << " records kept, " << job.parsed.dropped_regions
              << " rows dropped (non-mainland region)\n";
  }
  return 0;
}

int cmd_prep(const PipelineOptions& opt, const std::vector<std::string>& inputs,
             const std::string& out_path) {
  const auto records = load_inputs(inputs);
  const auto smooth = parse_smooth(opt.smooth);
  const auto window = parse_window(opt.window);

  const auto regions = regions_present(records, "deces_2020");
  if (regions.empty()) throw CliError(kExitInput, "no deces_2020 records in input");

  std::vector<ingest::CanonicalRecord> derived;
  int emitted = 0;
  for (int region : regions) {
    if (!region_selected(opt, region)) continue;
    DailySeries excess, dc;
    try {
      const auto d18 = ingest::to_daily_series(records, region, "deces_2018");
      const auto d19 = ingest::to_daily_series(records, region, "deces_2019");
      const auto d20 = ingest::to_daily_series(records, region, "deces_2020");
      excess = prep::excess_2020(d18, d19, d20, smooth);
      dc = prep::moving_average(
          ingest::to_daily_series(records, region, "incid_dc"), smooth);
      dc.indicator = "mean_incid_dc";
    } catch (const std::exception& e) {
      throw CliError(kExitInput, "region " + std::to_string(region) + ": " + e.what());
    }
    append_series(derived, excess);
    append_series(derived, dc);
    try {
      auto inserm = prep::moving_average(
          ingest::to_daily_series(records, region, "incid_inserm"), smooth);
      inserm.indicator = "mean_inserm";
      append_series(derived, inserm);
    } catch (const ingest::NoData&) {
      // optional signal
    }

    const auto excess_w = clip(excess, window);
    const auto dc_w = clip(dc, window);
    const auto corr = prep::fit_linear_correction(excess_w, dc_w, opt.tail_days);
    append_series(derived, prep::correct_excess(excess_w, dc_w, corr));
    ++emitted;
  }
  if (emitted == 0) throw CliError(kExitInput, "region filter matched nothing");

  write_file(out_path, ingest::write_canonical(derived));
  std::cout << "prepared " << emitted << " regions -> " << out_path << "\n";
  return 0;
}

identify::RegionSeries corrected_series(const std::vector<ingest::CanonicalRecord>& records,
                                        const PipelineOptions& opt) {
  identify::RegionSeries data;
  for (int region : regions_present(records, "mean_excess20_corr")) {
    if (!region_selected(opt, region)) continue;
    data[region] = ingest::to_daily_series(records, region, "mean_excess20_corr");
  }
  if (data.empty())
    throw CliError(kExitInput, "no mean_excess20_corr records in input");
  return data;
}

int cmd_identify(const PipelineOptions& opt, const std::vector<std::string>& inputs,
                 const std::string& model_path, const std::string& traj_path) {
  const auto records = load_inputs(inputs);
  const auto window = parse_window(opt.window);
  const auto data = corrected_series(records, opt);

  mds::MdsConfig cfg;
  cfg.max_evals = opt.max_evals;
  cfg.size_tol = opt.size_tol;

  identify::IdentifiedModel model;
  try {
    const auto weights = identify::default_weights(identify::clip_to_window(data, window));
    model = identify::identify(data, window, weights, cfg);
  } catch (const mds::InfeasibleStart& e) {
    throw CliError(kExitSolver, e.what());
  } catch (const identify::DegenerateRegression& e) {
    throw CliError(kExitSolver, e.what());
  } catch (const SpanMismatch& e) {
    throw CliError(kExitInput, e.what());
  }

  write_file(model_path, identify::to_json(model));
  if (!traj_path.empty()) {
    std::vector<ingest::CanonicalRecord> traj_records;
    for (const auto& [region, init] : model.inits) {
      const auto traj = dynamics::simulate(model.params, init, window.length() - 1);
      DailySeries fhat;
      fhat.region = region;
      fhat.indicator = "fhat";
      fhat.start = window.k0_date;
      fhat.values = traj.f;
      append_series(traj_records, fhat);
      DailySeries delta = fhat;
      delta.indicator = "delta";
      delta.values = traj.delta;
      append_series(traj_records, delta);
    }
    write_file(traj_path, ingest::write_canonical(traj_records));
  }
  std::cout << "a=" << model.params.a << " u=" << model.params.u
            << " cost=" << model.cost << " evals=" << model.solver_evals << "\n";
  return 0;
}

int cmd_simulate(const std::string& model_path, int steps, const std::string& out_path) {
  const auto model = identify::model_from_json(read_file(model_path));
  if (steps <= 0) steps = model.window.length() - 1;
  std::vector<ingest::CanonicalRecord> records;
  for (const auto& [region, init] : model.inits) {
    const auto traj = dynamics::simulate(model.params, init, steps);
    DailySeries fhat;
    fhat.region = region;
    fhat.indicator = "fhat";
    fhat.start = model.window.k0_date;
    fhat.values = traj.f;
    append_series(records, fhat);
    DailySeries delta = fhat;
    delta.indicator = "delta";
    delta.values = traj.delta;
    append_series(records, delta);
  }
  write_file(out_path, ingest::write_canonical(records));
  std::cout << "simulated " << model.inits.size() << " regions, " << steps
            << " steps -> " << out_path << "\n";
  return 0;
}

int cmd_validate(const PipelineOptions& opt, const std::string& model_path,
                 const std::vector<std::string>& measured_paths,
                 const std::string& out_csv, const std::string& out_json) {
  const auto model = identify::model_from_json(read_file(model_path));
  const auto records = load_inputs(measured_paths);
  const auto smooth = parse_smooth(opt.smooth);

  lagfit::LagSearchSpec spec;
  spec.eta_min = opt.eta_min;
  spec.eta_max = opt.eta_max;
  spec.window = model.window;

  std::map<int, DailySeries> model_f;
  for (const auto& [region, init] : model.inits) {
    const auto traj = dynamics::simulate(model.params, init, model.window.length() - 1);
    DailySeries fhat;
    fhat.region = region;
    fhat.indicator = "fhat";
    fhat.start = model.window.k0_date;
    fhat.values = traj.f;
    model_f[region] = std::move(fhat);
  }

  std::map<std::pair<int, std::string>, DailySeries> measured;
  for (const auto& tag : lagfit::validated_indicators()) {
    for (int region : regions_present(records, tag)) {
      if (!region_selected(opt, region)) continue;
      if (!model_f.count(region)) continue;
      auto s = prep::moving_average(ingest::to_daily_series(records, region, tag), smooth);
      s.indicator = tag;
      measured[{region, tag}] = std::move(s);
    }
  }

  const auto report = lagfit::validate_all(model_f, measured, spec);
  for (const auto& [label, message] : report.errors)
    std::cerr << "warning: " << label << ": " << message << "\n";
  if (report.fits.empty() && !measured.empty())
    throw CliError(kExitInput, "every indicator/region pair failed to fit");

  write_file(out_csv, lagfit::fits_to_csv(report.fits));
  if (!out_json.empty()) write_file(out_json, lagfit::fits_to_json(report.fits));
  std::cout << report.fits.size() << " fits, " << report.errors.size()
            << " failures -> " << out_csv << "\n";
  return 0;
}

int cmd_plot(const PipelineOptions& opt, const std::vector<std::string>& inputs,
             const std::vector<std::string>& series_specs, const std::string& out_path,
             const std::string& title) {
  const auto records = load_inputs(inputs);
  if (series_specs.empty()) throw CliError(kExitInput, "no --series given");

  std::vector<svg::ChartSeries> chart;
  for (const auto& spec_text : series_specs) {
    const auto colon = spec_text.find(':');
    if (colon == std::string::npos)
      throw CliError(kExitInput, "--series expects <region>:<indicator>");
    int region = 0;
    try {
      region = std::stoi(spec_text.substr(0, colon));
    } catch (const std::exception&) {
      throw CliError(kExitInput, "bad region in --series: " + spec_text);
    }
    const auto indicator = spec_text.substr(colon + 1);
    svg::ChartSeries entry;
    try {
      entry.data = ingest::to_daily_series(records, region, indicator);
    } catch (const ingest::NoData&) {
      throw CliError(kExitInput, "unknown series: " + spec_text);
    }
    entry.label = spec_text;
    entry.bold = indicator.rfind("mean_", 0) == 0 || indicator == "fhat";
    chart.push_back(std::move(entry));
  }
  (void)opt;

  svg::ChartSpec cs;
  cs.title = title;
  write_file(out_path, svg::render_chart(chart, cs));
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_report(const PipelineOptions& opt, const std::vector<std::string>& derived,
               const std::vector<std::string>& measured, const std::string& out_dir) {
  const auto model_path = (fs::path(out_dir) / "model.json").string();
  const auto traj_path = (fs::path(out_dir) / "trajectories.csv").string();
  cmd_identify(opt, derived, model_path, traj_path);

  std::vector<std::string> artifacts = {"model.json", "trajectories.csv"};
  if (!measured.empty()) {
    cmd_validate(opt, model_path, measured, (fs::path(out_dir) / "lag_table.csv").string(),
                 (fs::path(out_dir) / "lag_table.json").string());
    artifacts.push_back("lag_table.csv");
    artifacts.push_back("lag_table.json");
  }

  const auto records = load_inputs(derived);
  const auto traj = ingest::read_canonical(read_file(traj_path));
  for (int region : regions_present(records, "mean_excess20_corr")) {
    if (!region_selected(opt, region)) continue;
    std::vector<svg::ChartSeries> chart;
    svg::ChartSeries data_s;
    data_s.data = ingest::to_daily_series(records, region, "mean_excess20_corr");
    data_s.label = "mean_excess20_corr";
    data_s.bold = true;
    chart.push_back(std::move(data_s));
    svg::ChartSeries fit_s;
    fit_s.data = ingest::to_daily_series(traj, region, "fhat");
    fit_s.label = "estimation";
    chart.push_back(std::move(fit_s));
    svg::ChartSpec cs;
    cs.title = "region " + std::to_string(region);
    const auto name = "fit_region_" + std::to_string(region) + ".svg";
    write_file((fs::path(out_dir) / name).string(), svg::render_chart(chart, cs));
    artifacts.push_back(name);
  }

  std::string index = "epifit report\n";
  for (const auto& a : artifacts) index += "  " + a + "\n";
  write_file((fs::path(out_dir) / "index.txt").string(), index);
  std::cout << "report -> " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epifit: regional epidemic curve fitting pipeline"};
  app.require_subcommand(1);

  PipelineOptions opt;
  std::string config_path;
  app.add_option("--config", config_path, "pipeline config JSON");

  std::vector<std::string> configs, inputs, measured, series_specs;
  std::string out_dir = ".", out_path, model_path = "model.json";
  std::string traj_path, out_json, title;
  int steps = 0;

  auto* ingest_cmd = app.add_subcommand("ingest", "parse raw source CSV files");
  ingest_cmd->add_option("--adapter", configs, "adapter config JSON (one per input)")
      ->required();
  ingest_cmd->add_option("--input", inputs, "raw source CSV")->required();
  ingest_cmd->add_option("--out", out_dir, "output directory");

  auto* prep_cmd = app.add_subcommand("prep", "build derived death series");
  prep_cmd->add_option("--input", inputs, "canonical CSV")->required();
  prep_cmd->add_option("--out", out_path, "derived series CSV")->required();
  prep_cmd->add_option("--smooth", opt.smooth, "window days[:centered|trailing]");
  prep_cmd->add_option("--window", opt.window, "fit window <start>:<end>");
  prep_cmd->add_option("--tail-days", opt.tail_days, "correction tail length");
  prep_cmd->add_option("--region", opt.regions, "region filter (repeatable)");

  auto* id_cmd = app.add_subcommand("identify", "fit the joint two-parameter model");
  id_cmd->add_option("--input", inputs, "derived series CSV")->required();
  id_cmd->add_option("--out-model", model_path, "model JSON output");
  id_cmd->add_option("--out-traj", traj_path, "fitted trajectory CSV output");
  id_cmd->add_option("--window", opt.window, "fit window <start>:<end>");
  id_cmd->add_option("--max-evals", opt.max_evals, "objective evaluation budget");
  id_cmd->add_option("--size-tol", opt.size_tol, "relative simplex size tolerance");
  id_cmd->add_option("--region", opt.regions, "region filter (repeatable)");

  auto* sim_cmd = app.add_subcommand("simulate", "simulate a fitted model");
  sim_cmd->add_option("--model", model_path, "model JSON")->required();
  sim_cmd->add_option("--steps", steps, "steps (default: fit window)");
  sim_cmd->add_option("--out", out_path, "trajectory CSV output")->required();

  auto* val_cmd = app.add_subcommand("validate", "lag/scale fit of other indicators");
  val_cmd->add_option("--model", model_path, "model JSON")->required();
  val_cmd->add_option("--measured", measured, "canonical CSV of measured indicators")
      ->required();
  val_cmd->add_option("--out", out_path, "table CSV output")->required();
  val_cmd->add_option("--out-json", out_json, "table JSON output");
  val_cmd->add_option("--smooth", opt.smooth, "comparison smoothing");
  val_cmd->add_option("--eta-min", opt.eta_min, "lag search lower bound");
  val_cmd->add_option("--eta-max", opt.eta_max, "lag search upper bound");
  val_cmd->add_option("--region", opt.regions, "region filter (repeatable)");

  auto* plot_cmd = app.add_subcommand("plot", "render series as an SVG chart");
  plot_cmd->add_option("--input", inputs, "canonical CSV")->required();
  plot_cmd->add_option("--series", series_specs, "<region>:<indicator> (repeatable)");
  plot_cmd->add_option("--out", out_path, "SVG output")->required();
  plot_cmd->add_option("--title", title, "chart title");

  auto* report_cmd = app.add_subcommand("report", "identify + validate + plots");
  report_cmd->add_option("--input", inputs, "derived series CSV")->required();
  report_cmd->add_option("--measured", measured, "canonical measured indicators");
  report_cmd->add_option("--out", out_dir, "output directory")->required();
  report_cmd->add_option("--window", opt.window, "fit window <start>:<end>");
  report_cmd->add_option("--max-evals", opt.max_evals, "objective evaluation budget");
  report_cmd->add_option("--smooth", opt.smooth, "comparison smoothing");
  report_cmd->add_option("--region", opt.regions, "region filter (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) apply_config_file(opt, config_path);
    if (ingest_cmd->parsed()) return cmd_ingest(configs, inputs, out_dir);
    if (prep_cmd->parsed()) return cmd_prep(opt, inputs, out_path);
    if (id_cmd->parsed()) return cmd_identify(opt, inputs, model_path, traj_path);
    if (sim_cmd->parsed()) return cmd_simulate(model_path, steps, out_path);
    if (val_cmd->parsed())
      return cmd_validate(opt, model_path, measured, out_path, out_json);
    if (plot_cmd->parsed()) return cmd_plot(opt, inputs, series_specs, out_path, title);
    if (report_cmd->parsed()) return cmd_report(opt, inputs, measured, out_dir);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
