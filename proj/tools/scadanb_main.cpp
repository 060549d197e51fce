// scadanb: isolate normal-behavior SCADA data, score operational stability,
// and quantify per-turbine energy drift.
//
// Subcommands: generate, filter, pps, stable, exp1, exp2, report. Every run
// writes a manifest.json capturing configs, seeds and input digests; repeat
// runs with the same inputs are byte-identical, regardless of --jobs.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scadanb/csv.hpp"
#include "scadanb/experiments.hpp"
#include "scadanb/nb_filters.hpp"
#include "scadanb/parallel.hpp"
#include "scadanb/report_io.hpp"
#include "scadanb/synthetic.hpp"

namespace fs = std::filesystem;
using namespace scadanb;

namespace {

constexpr const char* kToolVersion = "scadanb 0.1.0";

// ---------------------------------------------------------------------------
// Flat key = value config file; flags override file values.

class ConfigFile {
public:
  void load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!key.empty()) values_[key] = value;
    }
  }

  double number(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stod(it->second);
  }
  int integer(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stoi(it->second);
  }
  bool flag(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return it->second == "on" || it->second == "true" || it->second == "1";
  }
  std::vector<int> int_list(const std::string& key, std::vector<int> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    std::stringstream ss(it->second);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
    return out;
  }

  const std::map<std::string, std::string>& raw() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

HardFilterConfig hard_config_from(const ConfigFile& cfg) {
  HardFilterConfig hard;
  hard.amb_temp_min = cfg.number("hard.amb_temp_min", hard.amb_temp_min);
  hard.max_year_exclusive = cfg.integer("hard.max_year_exclusive", hard.max_year_exclusive);
  hard.nominal_power_frac = cfg.number("hard.nominal_power_frac", hard.nominal_power_frac);
  hard.cut_in_speed = cfg.number("hard.cut_in_speed", hard.cut_in_speed);
  hard.power_floor_frac = cfg.number("hard.power_floor_frac", hard.power_floor_frac);
  hard.cut_out_speed = cfg.number("hard.cut_out_speed", hard.cut_out_speed);
  return hard;
}

nb::NbFilterConfig nb_config_from(const ConfigFile& cfg, std::uint64_t seed, unsigned jobs) {
  nb::NbFilterConfig nb;
  nb.mahalanobis_alpha = cfg.number("nb.mahalanobis_alpha", nb.mahalanobis_alpha);
  nb.pitch_bin_width = cfg.number("nb.pitch_bin_width", nb.pitch_bin_width);
  nb.hierarchical_min_bin =
      static_cast<std::size_t>(cfg.integer("nb.hierarchical_min_bin", 20));
  nb.voting_threshold = cfg.number("nb.voting_threshold", nb.voting_threshold);
  nb.voting_strict = cfg.flag("nb.voting_strict", nb.voting_strict);
  nb.k_candidates = cfg.int_list("nb.k_candidates", nb.k_candidates);
  nb.alpha_weight = cfg.number("nb.alpha_weight", nb.alpha_weight);
  nb.pps_stability_threshold =
      cfg.number("nb.pps_stability_threshold", nb.pps_stability_threshold);
  nb.rolling_std_threshold = cfg.number("nb.rolling_std_threshold", nb.rolling_std_threshold);
  nb.rolling_window = cfg.integer("nb.rolling_window", nb.rolling_window);
  nb.min_stable_years = cfg.integer("nb.min_stable_years", nb.min_stable_years);
  nb.latest_period_start_year =
      cfg.integer("nb.latest_period_start_year", nb.latest_period_start_year);
  nb.clamp_nb_year = cfg.flag("nb.clamp_nb_year", nb.clamp_nb_year);
  nb.seed = seed;
  nb.jobs = jobs;
  nb.em.max_iter = cfg.integer("em.max_iter", nb.em.max_iter);
  nb.em.tol = cfg.number("em.tol", nb.em.tol);
  nb.em.n_init = cfg.integer("em.n_init", nb.em.n_init);
  nb.em.cov_reg = cfg.number("em.cov_reg", nb.em.cov_reg);
  nb.pps.n_folds = cfg.integer("pps.n_folds", nb.pps.n_folds);
  nb.pps.min_samples_per_quarter =
      static_cast<std::size_t>(cfg.integer("pps.min_samples_per_quarter", 200));
  nb.pps.tree_max_depth = cfg.integer("pps.tree_max_depth", nb.pps.tree_max_depth);
  nb.pps.tree_min_leaf = static_cast<std::size_t>(cfg.integer("pps.tree_min_leaf", 20));
  return nb;
}

exp::ExperimentConfig experiment_config_from(const ConfigFile& cfg, std::uint64_t seed,
                                             bool normalize) {
  exp::ExperimentConfig out;
  out.seed = seed;
  out.normalize_delta = normalize;
  out.min_rows = static_cast<std::size_t>(cfg.integer("exp.min_rows", 120));
  out.tuner.n_trials = cfg.integer("tuner.n_trials", 50);
  out.tuner.seed = seed;
  out.cv.n_folds = cfg.integer("cv.n_folds", 5);
  out.cv.initial_train_size =
      static_cast<std::size_t>(cfg.integer("cv.initial_train_size", 0));
  out.cv.metric = cfg.flag("cv.use_mape", false) ? ml::Metric::Mape : ml::Metric::Mae;

  auto& space = out.tuner.search_space;
  space.knn_k_lo = static_cast<std::size_t>(cfg.integer("space.knn_k_lo", 2));
  space.knn_k_hi = static_cast<std::size_t>(cfg.integer("space.knn_k_hi", 50));
  space.forest_trees_lo = static_cast<std::size_t>(cfg.integer("space.forest_trees_lo", 50));
  space.forest_trees_hi = static_cast<std::size_t>(cfg.integer("space.forest_trees_hi", 400));
  space.forest_depth_lo = cfg.integer("space.forest_depth_lo", 4);
  space.forest_depth_hi = cfg.integer("space.forest_depth_hi", 20);
  space.forest_min_leaf_lo =
      static_cast<std::size_t>(cfg.integer("space.forest_min_leaf_lo", 1));
  space.forest_min_leaf_hi =
      static_cast<std::size_t>(cfg.integer("space.forest_min_leaf_hi", 20));
  space.gbt_trees_lo = static_cast<std::size_t>(cfg.integer("space.gbt_trees_lo", 50));
  space.gbt_trees_hi = static_cast<std::size_t>(cfg.integer("space.gbt_trees_hi", 500));
  space.gbt_lr_lo = cfg.number("space.gbt_lr_lo", 0.01);
  space.gbt_lr_hi = cfg.number("space.gbt_lr_hi", 0.3);
  space.gbt_depth_lo = cfg.integer("space.gbt_depth_lo", 3);
  space.gbt_depth_hi = cfg.integer("space.gbt_depth_hi", 10);
  space.gbt_lambda_lo = cfg.number("space.gbt_lambda_lo", 0.0);
  space.gbt_lambda_hi = cfg.number("space.gbt_lambda_hi", 10.0);
  space.mlp_lr_lo = cfg.number("space.mlp_lr_lo", 1e-4);
  space.mlp_lr_hi = cfg.number("space.mlp_lr_hi", 1e-2);
  return out;
}

// ---------------------------------------------------------------------------
// Shared plumbing.

struct CommonOptions {
  std::string in;
  std::string out;
  std::string config_path;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

ConfigFile load_config(const CommonOptions& opts) {
  ConfigFile cfg;
  if (!opts.config_path.empty()) cfg.load(opts.config_path);
  return cfg;
}

std::vector<fs::path> sorted_csv_inputs(const std::string& in) {
  std::vector<fs::path> files;
  const fs::path path(in);
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
  } else if (fs::exists(path)) {
    files.push_back(path);
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<ScadaFrame> load_frames(const std::vector<fs::path>& files, bool strict) {
  std::map<int, ScadaFrame> by_id;
  for (const auto& file : files) {
    for (auto& frame : load_csv(file, strict)) {
      auto [it, inserted] = by_id.try_emplace(frame.turbine_id, std::move(frame));
      if (!inserted)
        throw Error("turbine " + std::to_string(it->first) +
                    " appears in more than one input file");
    }
  }
  std::vector<ScadaFrame> frames;
  frames.reserve(by_id.size());
  for (auto& [id, frame] : by_id) frames.push_back(std::move(frame));
  return frames;
}

std::string turbine_file(const char* prefix, int turbine_id, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d.%s", prefix, turbine_id, ext);
  return buf;
}

class ManifestWriter {
public:
  ManifestWriter(std::string command, const CommonOptions& opts, const ConfigFile& cfg) {
    j_["tool"] = kToolVersion;
    j_["command"] = std::move(command);
    // --jobs is not recorded: parallelism never changes results, so it is
    // not part of a run's identity.
    j_["seed"] = opts.seed;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    for (const auto& [key, value] : cfg.raw()) config[key] = value;
    j_["config"] = config;
    j_["inputs"] = nlohmann::ordered_json::array();
    j_["outputs"] = nlohmann::ordered_json::array();
    // Reserved for interval-scoped voting overrides; not implemented.
    j_["voting_period_overrides"] = nlohmann::ordered_json::array();
  }

  void add_input(const fs::path& path) {
    nlohmann::ordered_json item;
    item["path"] = path.filename().string();
    item["digest"] = io::file_digest(path);
    j_["inputs"].push_back(item);
  }
  void add_output(const fs::path& path) { j_["outputs"].push_back(path.filename().string()); }
  nlohmann::ordered_json& json() { return j_; }

  void write(const fs::path& out_dir) {
    std::ofstream out(out_dir / "manifest.json");
    out << j_.dump(2) << "\n";
  }

private:
  nlohmann::ordered_json j_;
};

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_generate(const CommonOptions& opts, int turbines, int years) {
  const ConfigFile cfg = load_config(opts);
  fs::create_directories(opts.out);
  ManifestWriter manifest("generate", opts, cfg);

  SyntheticConfig base;
  base.seed = opts.seed;
  base.start_year = cfg.integer("synth.start_year", base.start_year);
  base.n_years = years > 0 ? years : cfg.integer("synth.n_years", base.n_years);
  base.interval_minutes = cfg.integer("synth.interval_minutes", base.interval_minutes);
  base.rated_power = cfg.number("synth.rated_power", base.rated_power);
  base.cut_in = cfg.number("synth.cut_in", base.cut_in);
  base.cut_out = cfg.number("synth.cut_out", base.cut_out);
  base.rate_anomaly1 = cfg.number("synth.anomaly1", base.rate_anomaly1);
  base.rate_anomaly2 = cfg.number("synth.anomaly2", base.rate_anomaly2);
  base.rate_anomaly3 = cfg.number("synth.anomaly3", base.rate_anomaly3);
  base.rate_anomaly4 = cfg.number("synth.anomaly4", base.rate_anomaly4);
  base.degradation_rate = cfg.number("synth.degradation_rate", base.degradation_rate);
  base.noise_scale = cfg.number("synth.noise_scale", base.noise_scale);

  const int n_turbines = cfg.integer("synth.turbines", turbines);
  std::vector<ScadaFrame> frames(static_cast<std::size_t>(n_turbines));
  parallel_for(frames.size(), opts.jobs, [&](std::size_t i) {
    SyntheticConfig turbine_cfg = base;
    turbine_cfg.turbine_id = static_cast<int>(i) + 1;
    frames[i] = generate_synthetic(turbine_cfg);
  });
  for (const auto& frame : frames) {
    const fs::path path = fs::path(opts.out) / turbine_file("turbine", frame.turbine_id, "csv");
    write_csv(path, frame);
    manifest.add_output(path);
  }
  manifest.json()["baseline_curve"] = synthetic_curve_note();
  manifest.json()["records_per_turbine"] = frames.empty() ? 0 : frames[0].size();
  manifest.write(opts.out);
  return 0;
}

int cmd_filter(const CommonOptions& opts, const std::string& strict_voting) {
  const ConfigFile cfg = load_config(opts);
  const auto files = sorted_csv_inputs(opts.in);
  if (files.empty()) throw EmptyInputError("no input frames under " + opts.in);
  auto frames = load_frames(files, false);
  fs::create_directories(opts.out);

  ManifestWriter manifest("filter", opts, cfg);
  for (const auto& file : files) manifest.add_input(file);

  const HardFilterConfig hard = hard_config_from(cfg);
  // Turbines parallelize here; the per-quarter loop stays single-threaded.
  nb::NbFilterConfig nb_cfg = nb_config_from(cfg, opts.seed, 1);
  if (!strict_voting.empty()) nb_cfg.voting_strict = strict_voting == "on";

  std::vector<nb::PipelineResult> results(frames.size());
  parallel_for(frames.size(), opts.jobs,
               [&](std::size_t i) { results[i] = nb::run_nb_pipeline(frames[i], hard, nb_cfg); });

  std::vector<nb::StablePeriod> all_periods;
  nlohmann::ordered_json turbine_summaries = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const int id = frames[i].turbine_id;
    const auto& result = results[i];

    const fs::path cleaned = fs::path(opts.out) / turbine_file("cleaned", id, "csv");
    write_csv(cleaned, result.frame);
    manifest.add_output(cleaned);

    std::vector<FilterReport> reports;
    reports.push_back(result.hard_report);
    reports.insert(reports.end(), result.stage_reports.begin(), result.stage_reports.end());
    const fs::path report_path = fs::path(opts.out) / turbine_file("stage_reports", id, "csv");
    io::write_filter_reports_csv(report_path, reports);
    manifest.add_output(report_path);

    const fs::path pps_path = fs::path(opts.out) / turbine_file("pps_series", id, "csv");
    io::write_pps_csv(pps_path, id, result.pps_series);
    manifest.add_output(pps_path);

    const fs::path ksel_path = fs::path(opts.out) / turbine_file("k_selection", id, "json");
    std::ofstream(ksel_path) << io::k_selection_to_json(result.k_selection) << "\n";
    manifest.add_output(ksel_path);

    all_periods.insert(all_periods.end(), result.stable_periods.begin(),
                       result.stable_periods.end());

    nlohmann::ordered_json summary;
    summary["turbine_id"] = id;
    summary["records_in"] = frames[i].size();
    summary["records_out"] = result.frame.size();
    summary["max_grid_power"] = result.max_grid_power;
    nlohmann::ordered_json stage_counts = nlohmann::ordered_json::object();
    stage_counts[result.hard_report.stage] = result.hard_report.kept;
    for (const auto& report : result.stage_reports) stage_counts[report.stage] = report.kept;
    summary["kept_after_stage"] = stage_counts;
    nlohmann::ordered_json chosen = nlohmann::ordered_json::object();
    for (const auto& sel : result.k_selection)
      chosen[quarter_label(sel.quarter)] = sel.chosen_k;
    summary["chosen_k"] = chosen;
    summary["stable_periods"] = result.stable_periods.size();
    turbine_summaries.push_back(summary);
  }
  const fs::path periods_path = fs::path(opts.out) / "stable_periods.json";
  std::ofstream(periods_path) << io::stable_periods_to_json(all_periods) << "\n";
  manifest.add_output(periods_path);
  manifest.json()["turbines"] = turbine_summaries;
  manifest.write(opts.out);
  return 0;
}

int cmd_pps(const CommonOptions& opts) {
  const ConfigFile cfg = load_config(opts);
  const auto files = sorted_csv_inputs(opts.in);
  if (files.empty()) throw EmptyInputError("no input frames under " + opts.in);
  auto frames = load_frames(files, false);
  fs::create_directories(opts.out);
  ManifestWriter manifest("pps", opts, cfg);
  for (const auto& file : files) manifest.add_input(file);

  const nb::NbFilterConfig nb_cfg = nb_config_from(cfg, opts.seed, 1);
  std::vector<std::vector<pps::PpsResult>> series(frames.size());
  parallel_for(frames.size(), opts.jobs, [&](std::size_t i) {
    series[i] = pps::pps_quarterly(frames[i], explanatory_fields(), nb_cfg.pps);
  });
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const int id = frames[i].turbine_id;
    const fs::path csv_path = fs::path(opts.out) / turbine_file("pps_series", id, "csv");
    io::write_pps_csv(csv_path, id, series[i]);
    manifest.add_output(csv_path);

    io::SvgSeries combined;
    combined.label = "combined average";
    double tick = 0;
    for (const auto& result : series[i]) {
      if (!result.sufficient) continue;
      combined.x.push_back(tick++);
      combined.y.push_back(result.combined_avg);
    }
    const fs::path svg_path = fs::path(opts.out) / turbine_file("pps_series", id, "svg");
    std::ofstream(svg_path) << io::render_line_chart(
        "Combined PPS, turbine " + std::to_string(id), "quarter index", "pps", {combined});
    manifest.add_output(svg_path);
  }
  manifest.write(opts.out);
  return 0;
}

int cmd_stable(const CommonOptions& opts) {
  const ConfigFile cfg = load_config(opts);
  fs::create_directories(opts.out);
  ManifestWriter manifest("stable", opts, cfg);
  const nb::NbFilterConfig nb_cfg = nb_config_from(cfg, opts.seed, 1);

  std::vector<fs::path> series_files;
  const fs::path in(opts.in);
  if (fs::is_directory(in)) {
    for (const auto& entry : fs::directory_iterator(in)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("pps_series_", 0) == 0 && entry.path().extension() == ".csv")
        series_files.push_back(entry.path());
    }
    std::sort(series_files.begin(), series_files.end());
  } else if (fs::exists(in)) {
    series_files.push_back(in);
  }
  if (series_files.empty()) throw EmptyInputError("no pps series under " + opts.in);

  std::vector<nb::StablePeriod> all_periods;
  for (const auto& file : series_files) {
    manifest.add_input(file);
    int turbine_id = 0;
    const auto series = io::read_pps_csv(file, &turbine_id);
    const auto periods = nb::stability_scan(series, turbine_id, nb_cfg);
    all_periods.insert(all_periods.end(), periods.begin(), periods.end());
  }
  const fs::path periods_path = fs::path(opts.out) / "stable_periods.json";
  std::ofstream(periods_path) << io::stable_periods_to_json(all_periods) << "\n";
  manifest.add_output(periods_path);
  manifest.write(opts.out);
  return 0;
}

int cmd_experiment(const CommonOptions& opts, int which, const std::string& model,
                   const std::string& features, bool normalize) {
  const ConfigFile cfg = load_config(opts);
  const ml::ModelFamily family = ml::family_from_name(model);
  const exp::FeatureSetKind kind = exp::feature_set_from_name(features);

  const fs::path in(opts.in);
  if (!fs::is_directory(in)) throw Error("expected a filter output directory: " + opts.in);
  std::vector<fs::path> cleaned;
  for (const auto& entry : fs::directory_iterator(in)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("cleaned_", 0) == 0 && entry.path().extension() == ".csv")
      cleaned.push_back(entry.path());
  }
  std::sort(cleaned.begin(), cleaned.end());
  if (cleaned.empty()) throw EmptyInputError("no cleaned frames under " + opts.in);
  const fs::path periods_path = in / "stable_periods.json";
  if (!fs::exists(periods_path)) throw Error("missing stable_periods.json under " + opts.in);
  std::ifstream periods_in(periods_path);
  const std::string periods_text{std::istreambuf_iterator<char>(periods_in),
                                 std::istreambuf_iterator<char>()};
  const auto periods = io::stable_periods_from_json(periods_text);

  fs::create_directories(opts.out);
  ManifestWriter manifest(which == 1 ? "exp1" : "exp2", opts, cfg);
  for (const auto& file : cleaned) manifest.add_input(file);
  manifest.add_input(periods_path);

  auto frames = load_frames(cleaned, false);
  const exp::ExperimentConfig exp_cfg = experiment_config_from(cfg, opts.seed, normalize);

  struct Task {
    const ScadaFrame* frame;
    nb::StablePeriod period;
  };
  std::vector<Task> tasks;
  for (const auto& frame : frames)
    for (const auto& period : periods)
      if (period.turbine_id == frame.turbine_id) tasks.push_back({&frame, period});

  std::vector<exp::DriftReport> reports(tasks.size());
  std::vector<std::string> failures(tasks.size());
  parallel_for(tasks.size(), opts.jobs, [&](std::size_t i) {
    try {
      reports[i] = which == 1
                       ? exp::run_experiment1(*tasks[i].frame, tasks[i].period, kind, family,
                                              exp_cfg)
                       : exp::run_experiment2(*tasks[i].frame, tasks[i].period, kind, family,
                                              exp_cfg);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  std::vector<exp::DriftReport> ok;
  nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (failures[i].empty()) {
      ok.push_back(reports[i]);
    } else {
      nlohmann::ordered_json item;
      item["turbine_id"] = tasks[i].period.turbine_id;
      item["reason"] = failures[i];
      skipped.push_back(item);
    }
  }

  const std::string stem = which == 1 ? "exp1" : "exp2";
  const fs::path drift_path = fs::path(opts.out) / (stem + "_drift.csv");
  io::write_drift_csv(drift_path, ok);
  manifest.add_output(drift_path);

  for (const auto& report : ok) {
    nlohmann::ordered_json bundle;
    bundle["turbine_id"] = report.turbine_id;
    bundle["experiment"] = report.experiment;
    bundle["model"] = ml::family_name(report.family);
    bundle["feature_set"] = exp::feature_set_name(report.features);
    bundle["year_feature"] = report.year_feature;
    bundle["nb_year"] = report.nb_year;
    bundle["reference_year"] = report.reference_year;
    bundle["normalized_delta"] = report.normalized;
    bundle["tuned"] = ml::describe_spec(report.tuned_spec);
    bundle["cv_error"] = report.cv_error;
    nlohmann::ordered_json years = nlohmann::ordered_json::array();
    for (const auto& ys : report.per_year) {
      nlohmann::ordered_json item;
      item["year"] = ys.year;
      item["delta"] = ys.delta;
      item["drift_delta"] = ys.drift_delta;
      item["mae"] = ys.mae;
      item["mape"] = ys.mape;
      item["n"] = ys.n;
      years.push_back(item);
    }
    bundle["per_year"] = years;
    const fs::path bundle_path =
        fs::path(opts.out) / turbine_file(stem.c_str(), report.turbine_id, "json");
    std::ofstream(bundle_path) << bundle.dump(2) << "\n";
    manifest.add_output(bundle_path);

    const fs::path trials_path =
        fs::path(opts.out) /
        turbine_file((stem + "_trials").c_str(), report.turbine_id, "csv");
    io::write_trials_csv(trials_path, report.trials);
    manifest.add_output(trials_path);
  }
  manifest.json()["skipped"] = skipped;
  manifest.json()["drift_normalized"] = normalize;
  manifest.write(opts.out);
  return 0;
}

int cmd_report(const CommonOptions& opts) {
  const ConfigFile cfg = load_config(opts);
  fs::create_directories(opts.out);
  ManifestWriter manifest("report", opts, cfg);
  const fs::path in(opts.in);
  if (!fs::is_directory(in)) throw Error("expected a directory: " + opts.in);

  std::vector<fs::path> drift_files;
  std::vector<fs::path> pps_files;
  for (const auto& entry : fs::directory_iterator(in)) {
    const auto name = entry.path().filename().string();
    if (entry.path().extension() == ".csv") {
      if (name.find("drift") != std::string::npos) drift_files.push_back(entry.path());
      if (name.rfind("pps_series_", 0) == 0) pps_files.push_back(entry.path());
    }
  }
  std::sort(drift_files.begin(), drift_files.end());
  std::sort(pps_files.begin(), pps_files.end());
  if (drift_files.empty() && pps_files.empty())
    throw EmptyInputError("nothing to report under " + opts.in);

  if (!drift_files.empty()) {
    struct Row {
      int turbine, experiment, year, n;
      std::string model, feature_set;
      double delta, drift_delta, mae, mape;
    };
    std::vector<Row> rows;
    for (const auto& file : drift_files) {
      manifest.add_input(file);
      std::ifstream stream(file);
      std::string line;
      std::getline(stream, line);
      while (std::getline(stream, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 12) continue;
        Row row;
        row.turbine = std::stoi(cells[0]);
        row.experiment = std::stoi(cells[1]);
        row.model = cells[2];
        row.feature_set = cells[3];
        row.year = std::stoi(cells[6]);
        row.delta = std::stod(cells[7]);
        row.drift_delta = std::stod(cells[8]);
        row.mae = std::stod(cells[9]);
        row.mape = std::stod(cells[10]);
        row.n = std::stoi(cells[11]);
        rows.push_back(row);
      }
    }

    // Farm summary from the final target year per (turbine, experiment,
    // model, feature set).
    std::map<std::tuple<int, int, std::string, std::string>, Row> last_year;
    for (const auto& row : rows) {
      const auto key = std::make_tuple(row.turbine, row.experiment, row.model, row.feature_set);
      const auto it = last_year.find(key);
      if (it == last_year.end() || row.year > it->second.year) last_year[key] = row;
    }
    const double threshold = cfg.number("report.drift_threshold", 0.5);
    std::map<std::pair<int, std::string>, std::array<std::size_t, 3>> counts;
    for (const auto& [key, row] : last_year) {
      auto& c = counts[{std::get<1>(key), std::get<2>(key)}];
      if (row.drift_delta < -threshold)
        ++c[0];
      else if (row.drift_delta > threshold)
        ++c[1];
      else
        ++c[2];
    }
    const fs::path summary_path = fs::path(opts.out) / "farm_summary.csv";
    {
      std::ofstream out(summary_path);
      out << "experiment,model,decline,improve,no_change\n";
      for (const auto& [key, c] : counts)
        out << key.first << ',' << key.second << ',' << c[0] << ',' << c[1] << ',' << c[2]
            << "\n";
    }
    manifest.add_output(summary_path);

    // One drift chart per (experiment, model, feature set), a line per turbine.
    std::map<std::tuple<int, std::string, std::string>, std::map<int, io::SvgSeries>> charts;
    for (const auto& row : rows) {
      auto& series = charts[{row.experiment, row.model, row.feature_set}][row.turbine];
      series.label = "turbine " + std::to_string(row.turbine);
      series.x.push_back(row.year);
      series.y.push_back(row.drift_delta);
    }
    for (const auto& [key, by_turbine] : charts) {
      std::vector<io::SvgSeries> series;
      for (const auto& [id, s] : by_turbine) series.push_back(s);
      std::ostringstream name;
      name << "drift_exp" << std::get<0>(key) << "_" << std::get<1>(key) << "_"
           << std::get<2>(key) << ".svg";
      const fs::path svg_path = fs::path(opts.out) / name.str();
      std::ofstream(svg_path) << io::render_line_chart(
          "Drift vs year (exp " + std::to_string(std::get<0>(key)) + ", " +
              std::get<1>(key) + ", " + std::get<2>(key) + ")",
          "year", "drift delta [%]", series);
      manifest.add_output(svg_path);
    }
  }

  for (const auto& file : pps_files) {
    manifest.add_input(file);
    int turbine_id = 0;
    const auto series = io::read_pps_csv(file, &turbine_id);
    io::SvgSeries combined;
    combined.label = "combined average";
    double tick = 0;
    for (const auto& result : series) {
      if (!result.sufficient) continue;
      combined.x.push_back(tick++);
      combined.y.push_back(result.combined_avg);
    }
    const fs::path svg_path =
        fs::path(opts.out) / turbine_file("pps_combined", turbine_id, "svg");
    std::ofstream(svg_path) << io::render_line_chart(
        "Combined PPS, turbine " + std::to_string(turbine_id), "quarter index", "pps",
        {combined});
    manifest.add_output(svg_path);
  }
  manifest.write(opts.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal-behavior isolation and drift quantification for SCADA data"};
  app.require_subcommand(1);

  CommonOptions opts;
  int turbines = 2;
  int years = 0;
  std::string model = "gbt";
  std::string features = "pc";
  std::string normalize_drift = "on";
  std::string strict_voting;

  const auto add_common = [&](CLI::App* cmd, bool needs_in) {
    if (needs_in) cmd->add_option("--in", opts.in, "Input file or directory")->required();
    cmd->add_option("--out", opts.out, "Output directory")->required();
    cmd->add_option("--config", opts.config_path, "Key = value config file");
    cmd->add_option("--seed", opts.seed, "Run seed");
    cmd->add_option("--jobs", opts.jobs, "Worker threads");
  };

  auto* generate = app.add_subcommand("generate", "Write synthetic SCADA frames");
  add_common(generate, false);
  generate->add_option("--turbines", turbines, "Number of turbines");
  generate->add_option("--years", years, "Years of data per turbine");

  auto* filter = app.add_subcommand("filter", "Hard + NB filtering pipeline");
  add_common(filter, true);
  filter->add_option("--strict-voting", strict_voting, "on|off")
      ->check(CLI::IsMember({"on", "off"}));

  auto* pps_cmd = app.add_subcommand("pps", "Quarterly PPS series and chart");
  add_common(pps_cmd, true);

  auto* stable = app.add_subcommand("stable", "Stable-period scan over PPS series");
  add_common(stable, true);

  auto* exp1 = app.add_subcommand("exp1", "NB-year drift experiment");
  add_common(exp1, true);
  exp1->add_option("--model", model)->check(CLI::IsMember({"knn", "forest", "gbt", "mlp"}));
  exp1->add_option("--features", features)->check(CLI::IsMember({"pc", "all"}));
  exp1->add_option("--normalize-drift", normalize_drift)->check(CLI::IsMember({"on", "off"}));

  auto* exp2 = app.add_subcommand("exp2", "Year-substitution sensitivity experiment");
  add_common(exp2, true);
  exp2->add_option("--model", model)->check(CLI::IsMember({"knn", "forest", "gbt", "mlp"}));
  exp2->add_option("--features", features)->check(CLI::IsMember({"pc", "all"}));
  exp2->add_option("--normalize-drift", normalize_drift)->check(CLI::IsMember({"on", "off"}));

  auto* report = app.add_subcommand("report", "Aggregate summaries and charts");
  add_common(report, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) return cmd_generate(opts, turbines, years);
    if (filter->parsed()) return cmd_filter(opts, strict_voting);
    if (pps_cmd->parsed()) return cmd_pps(opts);
    if (stable->parsed()) return cmd_stable(opts);
    if (exp1->parsed())
      return cmd_experiment(opts, 1, model, features, normalize_drift == "on");
    if (exp2->parsed())
      return cmd_experiment(opts, 2, model, features, normalize_drift == "on");
    if (report->parsed()) return cmd_report(opts);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
