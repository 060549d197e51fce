#pragma once

#include <string>
#include <vector>

#include "scadanb/cv.hpp"
#include "scadanb/nb_filters.hpp"
#include "scadanb/scada.hpp"

namespace scadanb::exp {

enum class FeatureSetKind { PC, All };

FeatureSetKind feature_set_from_name(const std::string& name);
const std::string& feature_set_name(FeatureSetKind kind);

/// Columns of a named feature set: PC is {WindSpeed, AmbTemp}; All is every
/// explanatory variable except WSE.
std::vector<Field> feature_columns(FeatureSetKind kind);

struct YearStats {
  int year = 0;
  double delta = 0.0;        // drift score for the year, percent
  double drift_delta = 0.0;  // delta_t - delta_reference; 0 for the reference year
  double mae = 0.0;
  double mape = 0.0;
  std::size_t n = 0;
};

struct DriftReport {
  int turbine_id = 0;
  ml::ModelFamily family = ml::ModelFamily::Gbt;
  FeatureSetKind features = FeatureSetKind::PC;
  bool year_feature = false;  // true for the sensitivity experiment
  int experiment = 1;
  int nb_year = 0;
  int reference_year = 0;
  bool normalized = true;  // drift scores divided by the yearly sample count
  std::vector<YearStats> per_year;
  ml::ModelSpec tuned_spec;
  double cv_error = 0.0;
  std::vector<ml::Trial> trials;  // full tuning log
};

struct ExperimentConfig {
  ml::TunerConfig tuner;
  ml::CvConfig cv;
  bool normalize_delta = true;
  std::uint64_t seed = 0;
  std::size_t min_rows = 120;  // minimum NB-year (or period) rows for tuning
};

/// Experiment 1: tune and train on the NB year only (features scaled by
/// NB-year statistics), predict every later year of the stable period, and
/// report the yearly drift score and its offset from the reference year.
DriftReport run_experiment1(const ScadaFrame& frame, const nb::StablePeriod& period,
                            FeatureSetKind features, ml::ModelFamily family,
                            const ExperimentConfig& cfg);

enum class ReplicationPolicy { PerRow, EqualCountPerYear };
enum class Exp2Residual { ActualVsPrediction, PredictionVsPrediction };

struct Exp2Options {
  ReplicationPolicy replication = ReplicationPolicy::PerRow;
  Exp2Residual residual = Exp2Residual::ActualVsPrediction;
};

/// Replica bookkeeping of the year-substituted sensitivity dataset.
struct SensitivityDataset {
  Matrix features;                     // Year column overwritten with the NB year
  std::vector<double> actual;          // GridPower of the source rows
  std::vector<int> source_year;        // original year per replica
  std::vector<std::size_t> source_row; // row index into the period block
  std::size_t year_column = 0;
};

/// Experiment 2: train on the whole stable period with Year as a feature,
/// then predict on replicas whose Year is substituted with the NB year; the
/// drift per source year quantifies the learned yearly effect. The reported
/// MAPE is in-sample (predictions under the true year).
DriftReport run_experiment2(const ScadaFrame& frame, const nb::StablePeriod& period,
                            FeatureSetKind features, ml::ModelFamily family,
                            const ExperimentConfig& cfg, const Exp2Options& options = {});

/// Exposed for tests: the replica construction used by Experiment 2.
SensitivityDataset build_sensitivity_dataset(const Matrix& x, std::span<const double> y,
                                             std::span<const int> row_year, int nb_year,
                                             std::size_t year_column,
                                             ReplicationPolicy policy);

struct FarmSummary {
  std::size_t decline = 0;
  std::size_t improve = 0;
  std::size_t no_change = 0;
  double threshold = 0.5;  // percent-point cutoff on the final target-year drift

  std::size_t total() const { return decline + improve + no_change; }
};

/// Classify turbines by the drift of the last target year (PC feature set by
/// convention): decline below -threshold, improve above +threshold.
FarmSummary summarize(const std::vector<DriftReport>& reports, double threshold = 0.5);

}  // namespace scadanb::exp
