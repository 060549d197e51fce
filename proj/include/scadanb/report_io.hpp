#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scadanb/experiments.hpp"
#include "scadanb/nb_filters.hpp"

namespace scadanb::io {

/// Stage reports as rule,count CSV rows.
void write_filter_reports_csv(const std::filesystem::path& path,
                              const std::vector<FilterReport>& reports);

/// PPS series rows: turbine_id,year,quarter,variable,pps,combined_avg. The
/// "combined" pseudo-variable repeats the average so the file is
/// self-contained.
void write_pps_csv(const std::filesystem::path& path, int turbine_id,
                   const std::vector<pps::PpsResult>& series);

std::vector<pps::PpsResult> read_pps_csv(const std::filesystem::path& path, int* turbine_id);

/// Drift report rows: turbine,experiment,model,feature_set,year,delta,
/// drift_delta,mae,mape,n.
void write_drift_csv(const std::filesystem::path& path,
                     const std::vector<exp::DriftReport>& reports);

/// Tuner trial log: trial,params,cv_error.
void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<ml::Trial>& trials);

std::string stable_periods_to_json(const std::vector<nb::StablePeriod>& periods);
std::vector<nb::StablePeriod> stable_periods_from_json(const std::string& text);

std::string k_selection_to_json(const std::vector<nb::KSelectionResult>& selections);

/// Simple self-contained SVG line chart; one polyline per series.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<SvgSeries>& series);

/// FNV-1a digest of a file's bytes, as a hex string (input fingerprints for
/// the run manifest).
std::string file_digest(const std::filesystem::path& path);

}  // namespace scadanb::io
