#include "scadanb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "scadanb/rng.hpp"
#include "scadanb/stats.hpp"

namespace scadanb::exp {
namespace {

std::vector<std::size_t> rows_of_year(const ScadaFrame& frame, int year) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < frame.size(); ++i)
    if (year_of(frame.time_min[i]) == year) rows.push_back(i);
  return rows;
}

double delta_score(std::span<const double> y, std::span<const double> yhat, bool normalized) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += (y[i] - yhat[i]) / y[i];
  const double scale = normalized ? 100.0 / static_cast<double>(y.size()) : 100.0;
  return scale * sum;
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  return x.take_rows(std::span<const std::size_t>(rows.data(), rows.size()));
}

std::vector<double> take(std::span<const double> v, const std::vector<std::size_t>& rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
  return out;
}

}  // namespace

FeatureSetKind feature_set_from_name(const std::string& name) {
  if (name == "pc" || name == "PC") return FeatureSetKind::PC;
  if (name == "all" || name == "All") return FeatureSetKind::All;
  throw InvalidConfigError("unknown feature set: " + name);
}

const std::string& feature_set_name(FeatureSetKind kind) {
  static const std::string names[] = {"PC", "All"};
  return names[static_cast<int>(kind)];
}

std::vector<Field> feature_columns(FeatureSetKind kind) {
  if (kind == FeatureSetKind::PC) return {Field::WindSpeed, Field::AmbTemp};
  const auto all = explanatory_fields();
  return {all.begin(), all.end()};
}

DriftReport run_experiment1(const ScadaFrame& frame, const nb::StablePeriod& period,
                            FeatureSetKind features, ml::ModelFamily family,
                            const ExperimentConfig& cfg) {
  if (period.years.size() < 2) throw InvalidConfigError("experiment 1: period too short");
  const auto columns = feature_columns(features);
  const Matrix x_all = frame.features(columns);
  const auto& y_all = frame.column(Field::GridPower);

  // Fitting and scaling see NB-year rows only.
  const auto nb_rows = rows_of_year(frame, period.nb_year);
  if (nb_rows.size() < cfg.min_rows)
    throw InsufficientDataError("experiment 1: NB year has " +
                                std::to_string(nb_rows.size()) + " rows");
  const Matrix x_nb = take_rows(x_all, nb_rows);
  const std::vector<double> y_nb = take(y_all, nb_rows);

  const auto tuned = ml::tune(family, x_nb, y_nb, cfg.tuner, cfg.cv);
  const auto scaler = stats::robust_fit(x_nb);
  auto model = ml::make_regressor(tuned.best, mix_seed(cfg.seed, 0xe1));
  model->fit(stats::robust_apply(scaler, x_nb), y_nb);

  DriftReport report;
  report.turbine_id = frame.turbine_id;
  report.family = family;
  report.features = features;
  report.experiment = 1;
  report.nb_year = period.nb_year;
  report.reference_year = period.reference_year;
  report.normalized = cfg.normalize_delta;
  report.tuned_spec = tuned.best;
  report.cv_error = tuned.best_error;
  report.trials = tuned.trials;

  double delta_reference = 0.0;
  for (int year : period.years) {
    const auto rows = rows_of_year(frame, year);
    if (rows.empty()) throw InsufficientDataError("experiment 1: empty year " +
                                                  std::to_string(year));
    const Matrix x_year = stats::robust_apply(scaler, take_rows(x_all, rows));
    const std::vector<double> y_year = take(y_all, rows);
    const auto pred = model->predict(x_year);
    YearStats ys;
    ys.year = year;
    ys.n = rows.size();
    ys.delta = delta_score(y_year, pred, cfg.normalize_delta);
    ys.mae = stats::mae(y_year, pred);
    ys.mape = stats::mape(y_year, pred);
    if (year == period.reference_year) delta_reference = ys.delta;
    report.per_year.push_back(ys);
  }
  for (auto& ys : report.per_year)
    ys.drift_delta = ys.year >= period.reference_year ? ys.delta - delta_reference : 0.0;
  return report;
}

SensitivityDataset build_sensitivity_dataset(const Matrix& x, std::span<const double> y,
                                             std::span<const int> row_year, int nb_year,
                                             std::size_t year_column,
                                             ReplicationPolicy policy) {
  SensitivityDataset out;
  out.year_column = year_column;

  std::vector<std::size_t> replica_rows;
  if (policy == ReplicationPolicy::PerRow) {
    // Every post-NB-year row contributes one replica.
    for (std::size_t i = 0; i < row_year.size(); ++i)
      if (row_year[i] > nb_year) replica_rows.push_back(i);
  } else {
    // Equal replica count per source year: evenly spaced rows down to the
    // smallest year's count.
    std::map<int, std::vector<std::size_t>> by_year;
    for (std::size_t i = 0; i < row_year.size(); ++i)
      if (row_year[i] > nb_year) by_year[row_year[i]].push_back(i);
    std::size_t quota = std::numeric_limits<std::size_t>::max();
    for (const auto& [year, rows] : by_year) quota = std::min(quota, rows.size());
    for (const auto& [year, rows] : by_year) {
      const double stride = static_cast<double>(rows.size()) / static_cast<double>(quota);
      for (std::size_t j = 0; j < quota; ++j)
        replica_rows.push_back(rows[static_cast<std::size_t>(j * stride)]);
    }
    std::sort(replica_rows.begin(), replica_rows.end());
  }

  out.features = Matrix(replica_rows.size(), x.cols());
  out.actual.resize(replica_rows.size());
  out.source_year.resize(replica_rows.size());
  out.source_row = replica_rows;
  for (std::size_t i = 0; i < replica_rows.size(); ++i) {
    const std::size_t src = replica_rows[i];
    std::copy(x.row(src).begin(), x.row(src).end(), out.features.row(i).begin());
    out.features(i, year_column) = static_cast<double>(nb_year);
    out.actual[i] = y[src];
    out.source_year[i] = row_year[src];
  }
  return out;
}

DriftReport run_experiment2(const ScadaFrame& frame, const nb::StablePeriod& period,
                            FeatureSetKind features, ml::ModelFamily family,
                            const ExperimentConfig& cfg, const Exp2Options& options) {
  if (period.years.size() < 2) throw InvalidConfigError("experiment 2: period too short");
  const auto base_columns = feature_columns(features);

  // All stable-period rows, with Year appended as the last feature column.
  std::vector<std::size_t> rows;
  std::vector<int> row_year;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const int year = year_of(frame.time_min[i]);
    if (std::find(period.years.begin(), period.years.end(), year) != period.years.end()) {
      rows.push_back(i);
      row_year.push_back(year);
    }
  }
  if (rows.size() < cfg.min_rows)
    throw InsufficientDataError("experiment 2: period has " + std::to_string(rows.size()) +
                                " rows");

  const std::size_t year_col = base_columns.size();
  Matrix x(rows.size(), base_columns.size() + 1);
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < base_columns.size(); ++c)
      x(i, c) = frame.column(base_columns[c])[rows[i]];
    x(i, year_col) = static_cast<double>(row_year[i]);
    y[i] = frame.column(Field::GridPower)[rows[i]];
  }

  const auto tuned = ml::tune(family, x, y, cfg.tuner, cfg.cv);
  const auto scaler = stats::robust_fit(x);
  auto model = ml::make_regressor(tuned.best, mix_seed(cfg.seed, 0xe2));
  model->fit(stats::robust_apply(scaler, x), y);

  DriftReport report;
  report.turbine_id = frame.turbine_id;
  report.family = family;
  report.features = features;
  report.year_feature = true;
  report.experiment = 2;
  report.nb_year = period.nb_year;
  report.reference_year = period.reference_year;
  report.normalized = cfg.normalize_delta;
  report.tuned_spec = tuned.best;
  report.cv_error = tuned.best_error;
  report.trials = tuned.trials;

  // Replicas: post-NB-year rows with the Year overwritten by the NB year.
  const auto sens = build_sensitivity_dataset(x, y, row_year, period.nb_year, year_col,
                                              options.replication);
  const auto replica_pred = model->predict(stats::robust_apply(scaler, sens.features));

  // Optional alternate residual: compare against the prediction under the
  // true year instead of the measured value.
  std::vector<double> baseline = sens.actual;
  if (options.residual == Exp2Residual::PredictionVsPrediction) {
    Matrix true_year_features = sens.features;
    for (std::size_t i = 0; i < true_year_features.rows(); ++i)
      true_year_features(i, year_col) = static_cast<double>(sens.source_year[i]);
    baseline = model->predict(stats::robust_apply(scaler, true_year_features));
  }

  // In-sample errors per year under the true year, for comparability.
  const auto in_sample_pred = model->predict(stats::robust_apply(scaler, x));

  std::map<int, std::vector<std::size_t>> replicas_by_year;
  for (std::size_t i = 0; i < sens.source_year.size(); ++i)
    replicas_by_year[sens.source_year[i]].push_back(i);
  std::map<int, std::vector<std::size_t>> rows_by_year;
  for (std::size_t i = 0; i < rows.size(); ++i) rows_by_year[row_year[i]].push_back(i);

  double delta_reference = 0.0;
  for (int year : period.years) {
    YearStats ys;
    ys.year = year;
    const auto& year_rows = rows_by_year[year];
    ys.n = year_rows.size();
    if (!year_rows.empty()) {
      const std::vector<double> y_true = take(y, year_rows);
      const std::vector<double> y_pred = take(in_sample_pred, year_rows);
      ys.mae = stats::mae(y_true, y_pred);
      ys.mape = stats::mape(y_true, y_pred);
    }
    if (year > period.nb_year) {
      const auto& idx = replicas_by_year[year];
      if (!idx.empty()) {
        const std::vector<double> base = take(baseline, idx);
        const std::vector<double> pred = take(replica_pred, idx);
        ys.delta = delta_score(base, pred, cfg.normalize_delta);
      }
    }
    if (year == period.reference_year) delta_reference = ys.delta;
    report.per_year.push_back(ys);
  }
  for (auto& ys : report.per_year)
    ys.drift_delta = ys.year >= period.reference_year ? ys.delta - delta_reference : 0.0;
  return report;
}

FarmSummary summarize(const std::vector<DriftReport>& reports, double threshold) {
  if (reports.empty()) throw EmptyInputError("summarize");
  FarmSummary summary;
  summary.threshold = threshold;
  for (const auto& report : reports) {
    if (report.per_year.empty()) continue;
    const double last_drift = report.per_year.back().drift_delta;
    if (last_drift < -threshold)
      ++summary.decline;
    else if (last_drift > threshold)
      ++summary.improve;
    else
      ++summary.no_change;
  }
  return summary;
}

}  // namespace scadanb::exp
