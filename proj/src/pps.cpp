#include "scadanb/pps.hpp"

#include <cmath>
#include <limits>

#include "scadanb/stats.hpp"

namespace scadanb::pps {

void PpsConfig::validate() const {
  if (n_folds < 2) throw InvalidConfigError("pps: n_folds >= 2");
  if (tree_max_depth < 1) throw InvalidConfigError("pps: tree depth >= 1");
}

namespace {

// Mean fold error ratio; +inf when a fold has zero naive error but nonzero
// model error.
double normalized_error(std::span<const double> e, std::span<const double> t,
                        const PpsConfig& cfg) {
  cfg.validate();
  if (e.size() != t.size()) throw LengthMismatchError("pps_single");
  const std::size_t n = e.size();
  if (n < cfg.min_samples_per_quarter)
    throw TooFewSamplesError(n, cfg.min_samples_per_quarter);

  const std::size_t folds = static_cast<std::size_t>(cfg.n_folds);
  const std::size_t initial_train = n / (folds + 1);
  const std::size_t step = (n - initial_train) / folds;
  if (initial_train == 0 || step == 0) throw TooFewSamplesError(n, folds + 1);

  Matrix x(n, 1);
  for (std::size_t i = 0; i < n; ++i) x(i, 0) = e[i];

  double error_sum = 0.0;
  bool infinite_error = false;
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t train_end = initial_train + k * step;
    const std::size_t val_end = train_end + step;

    std::vector<std::size_t> train_rows(train_end);
    for (std::size_t i = 0; i < train_end; ++i) train_rows[i] = i;
    RegressionTree tree;
    tree.fit(x, t, train_rows,
             RegressionTree::Params{cfg.tree_max_depth, cfg.tree_min_leaf});
    const double naive =
        stats::median(std::span<const double>(t.data(), train_end));

    double model_abs = 0.0;
    double naive_abs = 0.0;
    for (std::size_t i = train_end; i < val_end; ++i) {
      model_abs += std::fabs(t[i] - tree.predict_row(x.row(i)));
      naive_abs += std::fabs(t[i] - naive);
    }
    if (naive_abs == 0.0) {
      // Degenerate fold: zero naive error counts as a perfect ratio only when
      // the model is also exact.
      if (model_abs > 0.0) infinite_error = true;
    } else {
      error_sum += model_abs / naive_abs;
    }
  }
  if (infinite_error) return std::numeric_limits<double>::infinity();
  return error_sum / static_cast<double>(folds);
}

}  // namespace

double pps_single(std::span<const double> e, std::span<const double> t,
                  const PpsConfig& cfg) {
  const double eps = normalized_error(e, t, cfg);
  if (std::isinf(eps)) return 0.0;
  return std::max(0.0, 1.0 - eps);
}

PpsResult pps_block(const ScadaFrame& block, const QuarterKey& key,
                    std::span<const Field> variables, const PpsConfig& cfg) {
  PpsResult result;
  result.quarter = key;
  if (block.size() < cfg.min_samples_per_quarter) {
    result.sufficient = false;
    return result;
  }
  result.sufficient = true;
  const auto& target = block.column(Field::GridPower);
  double sum = 0.0;
  for (Field f : variables) {
    const double eps = normalized_error(block.column(f), target, cfg);
    const double score = std::isinf(eps) ? 0.0 : std::max(0.0, 1.0 - eps);
    result.per_variable[f] = score;
    result.normalized_error[f] = eps;
    sum += score;
  }
  result.combined_avg = variables.empty() ? 0.0 : sum / static_cast<double>(variables.size());
  return result;
}

std::vector<PpsResult> pps_quarterly(const ScadaFrame& frame,
                                     std::span<const Field> variables,
                                     const PpsConfig& cfg) {
  cfg.validate();
  const auto quarters = partition_quarters(frame);
  std::vector<PpsResult> out;
  out.reserve(quarters.size());
  for (const auto& [key, block] : quarters)
    out.push_back(pps_block(block, key, variables, cfg));
  return out;
}

}  // namespace scadanb::pps
