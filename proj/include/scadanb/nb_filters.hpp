#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "scadanb/gmm.hpp"
#include "scadanb/hard_filters.hpp"
#include "scadanb/pps.hpp"
#include "scadanb/scada.hpp"

namespace scadanb::nb {

/// Settings for the five NB-filter stages. Defaults are the published ones:
/// strict voting, component weights 0.6/0.4, stability thresholds 0.8 and
/// 0.03, stable periods of at least three years starting no later than 2020.
struct NbFilterConfig {
  double mahalanobis_alpha = 0.05;
  double pitch_bin_width = 0.5;
  std::size_t hierarchical_min_bin = 20;
  double voting_threshold = 1.0;
  bool voting_strict = true;
  std::vector<int> k_candidates = {1, 2, 3, 4, 5};
  double alpha_weight = 0.6;
  double pps_stability_threshold = 0.8;
  double rolling_std_threshold = 0.03;
  int rolling_window = 4;
  int min_stable_years = 3;
  int latest_period_start_year = 2020;
  bool clamp_nb_year = true;  // restrict the NB year to 2018/2019
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  gmm::EmConfig em;
  pps::PpsConfig pps;

  void validate() const;
};

struct StageResult {
  ScadaFrame frame;
  FilterReport report;
};

/// Box-plot filter on each pitch column; a record flagged in any pitch
/// dimension is removed.
StageResult pitch_iqr_filter(const ScadaFrame& frame);

/// Bivariate Mahalanobis test of each (pitch, wind speed) pairing against the
/// chi-squared critical value; a record must pass all three pairings. A
/// pairing with a singular covariance is skipped and noted in the report.
StageResult mahalanobis_pitch_wind_filter(const ScadaFrame& frame, const NbFilterConfig& cfg);

/// Box-plot filter on wind speed within discretized PitchAngleA bins. Bins
/// under the minimum occupancy pass through unfiltered.
StageResult hierarchical_wind_iqr_filter(const ScadaFrame& frame, const NbFilterConfig& cfg);

struct VoteLedger {
  // (record time, sensor column) -> vote count
  std::map<std::pair<std::int64_t, Field>, int> votes;
  std::set<std::int64_t> flagged_intervals;
};

struct VoteResult {
  ScadaFrame frame;
  VoteLedger ledger;
  FilterReport report;
};

/// Consensus vote across the pitch triple and the blade-load triple on
/// robust-scaled values. Strict mode drops a record on any vote; non-strict
/// mode requires one sensor with two votes or a pairwise-disagreement
/// majority.
VoteResult sensor_vote_filter(const ScadaFrame& frame, const NbFilterConfig& cfg);

struct KSelectionEntry {
  double pps = 0.0;
  double n_delta = 0.0;
  double score = 0.0;
};

struct KSelectionResult {
  QuarterKey quarter;
  bool sufficient = false;
  std::map<int, KSelectionEntry> per_k;  // includes the k = 0 baseline
  int chosen_k = 0;
};

/// Multi-objective choice of the GMM component count for one quarter:
/// maximize alpha * PPS_k - (1 - alpha) * removal fraction over k = 0 (no
/// filtering) and the candidate set; ties break to the smaller k. Returns the
/// surviving rows of the winning configuration.
std::pair<ScadaFrame, KSelectionResult> select_k_and_filter(const ScadaFrame& quarter_frame,
                                                            const QuarterKey& key,
                                                            const NbFilterConfig& cfg);

struct StablePeriod {
  int turbine_id = 0;
  std::vector<int> years;  // contiguous, ascending
  int nb_year = 0;
  int reference_year = 0;
  std::vector<int> target_years;
};

struct QuarterStability {
  QuarterKey quarter;
  double combined_pps = 0.0;
  double rolling_std = 0.0;
  bool sufficient = false;
  bool stable = false;
};

/// Stability scan over an ordered quarterly PPS series: a quarter is stable
/// when its combined PPS strictly exceeds the level threshold and the rolling
/// standard deviation stays strictly below the variability threshold; a year
/// is stable when all four quarters are; periods are maximal runs of at least
/// min_stable_years contiguous stable years.
std::vector<StablePeriod> stability_scan(const std::vector<pps::PpsResult>& series,
                                         int turbine_id, const NbFilterConfig& cfg,
                                         std::vector<QuarterStability>* detail = nullptr);

struct PipelineResult {
  ScadaFrame frame;
  FilterReport hard_report;
  double max_grid_power = 0.0;
  std::vector<FilterReport> stage_reports;
  std::vector<KSelectionResult> k_selection;
  std::vector<pps::PpsResult> pps_series;
  std::vector<QuarterStability> stability;
  std::vector<StablePeriod> stable_periods;
};

/// Full pipeline in the published stage order: hard-filters, pitch IQR,
/// Mahalanobis, hierarchical IQR, voting, per-quarter GMM k-selection,
/// stability scan.
PipelineResult run_nb_pipeline(const ScadaFrame& frame, const HardFilterConfig& hard_cfg,
                               const NbFilterConfig& nb_cfg);

}  // namespace scadanb::nb
