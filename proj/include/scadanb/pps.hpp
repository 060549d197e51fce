#pragma once

#include <map>
#include <optional>
#include <vector>

#include "scadanb/scada.hpp"
#include "scadanb/tree.hpp"

namespace scadanb::pps {

/// Temporal predictive power score configuration. The score pits a shallow
/// regression tree against a naive median predictor inside expanding-window
/// folds, with mean absolute error as the error metric.
struct PpsConfig {
  int n_folds = 4;
  std::size_t min_samples_per_quarter = 200;
  int tree_max_depth = 4;
  std::size_t tree_min_leaf = 20;

  void validate() const;
};

struct PpsResult {
  QuarterKey quarter;
  bool sufficient = false;  // false: below the sample floor, no score
  std::map<Field, double> per_variable;
  std::map<Field, double> normalized_error;
  double combined_avg = 0.0;
};

/// PPS of a single explanatory column on a target column. Both series must be
/// time-ordered. Returns max(0, 1 - mean fold error ratio).
double pps_single(std::span<const double> e, std::span<const double> t,
                  const PpsConfig& cfg);

/// Per-quarter PPS of each variable on GridPower, plus the combined average.
/// Quarters under the sample floor are emitted with sufficient = false.
std::vector<PpsResult> pps_quarterly(const ScadaFrame& frame,
                                     std::span<const Field> variables,
                                     const PpsConfig& cfg);

/// PPS of a set of variables on GridPower for one already-partitioned block
/// of time-ordered rows (used inside GMM k-selection).
PpsResult pps_block(const ScadaFrame& block, const QuarterKey& key,
                    std::span<const Field> variables, const PpsConfig& cfg);

}  // namespace scadanb::pps
