#include "scadanb/nb_filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scadanb/parallel.hpp"
#include "scadanb/rng.hpp"
#include "scadanb/stats.hpp"

namespace scadanb::nb {
namespace {

constexpr std::array<Field, 3> kPitch = {Field::PitchAngleA, Field::PitchAngleB,
                                         Field::PitchAngleC};
constexpr std::array<Field, 3> kLoads = {Field::BladeLoadA, Field::BladeLoadB,
                                         Field::BladeLoadC};
constexpr std::array<Field, 4> kGmmFeatures = {Field::BladeLoadA, Field::BladeLoadB,
                                               Field::BladeLoadC, Field::WindSpeed};

FilterReport make_report(const std::string& stage, std::size_t total, std::size_t kept,
                         std::vector<std::pair<std::string, std::size_t>> rules) {
  FilterReport rep;
  rep.stage = stage;
  rep.total = total;
  rep.kept = kept;
  rep.removed_by_rule = std::move(rules);
  return rep;
}

}  // namespace

void NbFilterConfig::validate() const {
  if (!(alpha_weight > 0.0 && alpha_weight < 1.0))
    throw InvalidConfigError("nb: alpha_weight in (0,1)");
  if (!(mahalanobis_alpha > 0.0 && mahalanobis_alpha < 1.0))
    throw InvalidConfigError("nb: mahalanobis_alpha in (0,1)");
  if (!(pitch_bin_width > 0.0) || !(voting_threshold > 0.0) ||
      !(pps_stability_threshold > 0.0) || !(rolling_std_threshold > 0.0))
    throw InvalidConfigError("nb: thresholds must be positive");
  if (rolling_window < 1 || min_stable_years < 1)
    throw InvalidConfigError("nb: window and period length must be >= 1");
  for (int k : k_candidates)
    if (k < 1) throw InvalidConfigError("nb: k candidates must be >= 1");
  em.validate();
  pps.validate();
}

StageResult pitch_iqr_filter(const ScadaFrame& frame) {
  if (frame.size() == 0) throw EmptyFrameError("pitch_iqr_filter");
  std::vector<bool> remove(frame.size(), false);
  for (Field f : kPitch) {
    const auto flags = stats::tukey_flags(frame.column(f), /*relaxed=*/false);
    for (std::size_t i = 0; i < flags.size(); ++i)
      if (flags[i]) remove[i] = true;
  }
  std::vector<bool> keep(frame.size());
  std::size_t removed = 0;
  for (std::size_t i = 0; i < remove.size(); ++i) {
    keep[i] = !remove[i];
    removed += remove[i] ? 1 : 0;
  }
  StageResult out;
  out.frame = frame.filtered(keep);
  out.report = make_report("pitch_iqr", frame.size(), out.frame.size(),
                           {{"pitch_iqr", removed}});
  return out;
}

StageResult mahalanobis_pitch_wind_filter(const ScadaFrame& frame, const NbFilterConfig& cfg) {
  if (frame.size() < 30) throw TooFewSamplesError(frame.size(), 30);
  const double crit = stats::chi2_quantile(2, 1.0 - cfg.mahalanobis_alpha);
  const auto& ws = frame.column(Field::WindSpeed);
  const std::size_t n = frame.size();

  std::vector<bool> remove(n, false);
  std::size_t skipped_pairings = 0;
  for (Field pf : kPitch) {
    const auto& pitch = frame.column(pf);
    double mp = 0.0, mw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mp += pitch[i];
      mw += ws[i];
    }
    mp /= static_cast<double>(n);
    mw /= static_cast<double>(n);
    double spp = 0.0, sww = 0.0, spw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dp = pitch[i] - mp;
      const double dw = ws[i] - mw;
      spp += dp * dp;
      sww += dw * dw;
      spw += dp * dw;
    }
    const double denom = static_cast<double>(n - 1);
    Matrix cov(2, 2);
    cov(0, 0) = spp / denom;
    cov(1, 1) = sww / denom;
    cov(0, 1) = cov(1, 0) = spw / denom;
    // A pairing whose empirical covariance is not positive definite on its
    // own (constant pitch after earlier filtering, say) is skipped rather
    // than rescued by regularization.
    Matrix chol;
    if (!stats::cholesky(cov, chol)) {
      ++skipped_pairings;
      continue;
    }
    const std::array<double, 2> mean = {mp, mw};
    try {
      for (std::size_t i = 0; i < n; ++i) {
        const std::array<double, 2> x = {pitch[i], ws[i]};
        if (stats::mahalanobis_sq(x, mean, cov) > crit) remove[i] = true;
      }
    } catch (const SingularCovarianceError&) {
      ++skipped_pairings;
    }
  }

  std::vector<bool> keep(n);
  std::size_t removed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    keep[i] = !remove[i];
    removed += remove[i] ? 1 : 0;
  }
  StageResult out;
  out.frame = frame.filtered(keep);
  out.report = make_report("mahalanobis_pitch_wind", n, out.frame.size(),
                           {{"mahalanobis", removed},
                            {"pairings_skipped", skipped_pairings}});
  return out;
}

StageResult hierarchical_wind_iqr_filter(const ScadaFrame& frame, const NbFilterConfig& cfg) {
  if (frame.size() == 0) throw EmptyFrameError("hierarchical_wind_iqr_filter");
  const auto& pitch = frame.column(Field::PitchAngleA);
  const auto& ws = frame.column(Field::WindSpeed);
  const std::size_t n = frame.size();

  std::map<std::int64_t, std::vector<std::size_t>> bins;
  for (std::size_t i = 0; i < n; ++i)
    bins[static_cast<std::int64_t>(std::floor(pitch[i] / cfg.pitch_bin_width))].push_back(i);

  std::vector<bool> keep(n, true);
  std::size_t removed = 0;
  for (const auto& [bin, rows] : bins) {
    if (rows.size() < cfg.hierarchical_min_bin) continue;  // small bins pass through
    std::vector<double> values(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) values[j] = ws[rows[j]];
    const auto flags = stats::tukey_flags(values, /*relaxed=*/false);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (flags[j]) {
        keep[rows[j]] = false;
        ++removed;
      }
    }
  }
  StageResult out;
  out.frame = frame.filtered(keep);
  out.report = make_report("hierarchical_wind_iqr", n, out.frame.size(),
                           {{"wind_iqr_in_bin", removed}});
  return out;
}

VoteResult sensor_vote_filter(const ScadaFrame& frame, const NbFilterConfig& cfg) {
  const std::size_t n = frame.size();
  VoteResult out;
  out.report = make_report("sensor_vote", n, n, {{"vote", 0}});
  if (n == 0) {
    out.frame = frame;
    return out;
  }

  // Scale each sensor column by its own median/IQR; the comparison threshold
  // lives in scaled units.
  const auto scaled_triple = [&](const std::array<Field, 3>& group) {
    Matrix m(n, 3);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& col = frame.column(group[c]);
      for (std::size_t r = 0; r < n; ++r) m(r, c) = col[r];
    }
    const auto model = stats::robust_fit(m);
    stats::robust_apply_inplace(model, m);
    return m;
  };
  const Matrix pitch = scaled_triple(kPitch);
  const Matrix loads = scaled_triple(kLoads);

  std::vector<bool> keep(n, true);
  std::size_t removed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int votes[2][3] = {{0, 0, 0}, {0, 0, 0}};
    int disagreements[2] = {0, 0};
    const Matrix* groups[2] = {&pitch, &loads};
    for (int g = 0; g < 2; ++g) {
      for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
          const double d = std::fabs((*groups[g])(i, a) - (*groups[g])(i, b));
          if (d > cfg.voting_threshold) {
            ++votes[g][a];
            ++votes[g][b];
            ++disagreements[g];
          }
        }
      }
    }
    bool flag = false;
    if (cfg.voting_strict) {
      flag = disagreements[0] > 0 || disagreements[1] > 0;
    } else {
      for (int g = 0; g < 2 && !flag; ++g) {
        const bool majority = disagreements[g] >= 2;
        const bool two_votes =
            votes[g][0] >= 2 || votes[g][1] >= 2 || votes[g][2] >= 2;
        flag = majority || two_votes;
      }
    }
    if (disagreements[0] > 0 || disagreements[1] > 0) {
      const std::array<Field, 3>* names[2] = {&kPitch, &kLoads};
      for (int g = 0; g < 2; ++g)
        for (int s = 0; s < 3; ++s)
          if (votes[g][s] > 0)
            out.ledger.votes[{frame.time_min[i], (*names[g])[s]}] += votes[g][s];
    }
    if (flag) {
      out.ledger.flagged_intervals.insert(frame.time_min[i]);
      keep[i] = false;
      ++removed;
    }
  }
  out.frame = frame.filtered(keep);
  out.report = make_report("sensor_vote", n, out.frame.size(), {{"vote", removed}});
  return out;
}

std::pair<ScadaFrame, KSelectionResult> select_k_and_filter(const ScadaFrame& quarter_frame,
                                                            const QuarterKey& key,
                                                            const NbFilterConfig& cfg) {
  KSelectionResult result;
  result.quarter = key;

  const std::size_t n = quarter_frame.size();
  const int max_k = *std::max_element(cfg.k_candidates.begin(), cfg.k_candidates.end());
  if (n < cfg.pps.min_samples_per_quarter || n < static_cast<std::size_t>(10 * max_k)) {
    result.sufficient = false;
    result.chosen_k = 0;
    return {quarter_frame, result};
  }
  result.sufficient = true;

  const auto variables = explanatory_fields();
  const auto score_of = [&](double pps_value, double n_delta) {
    return cfg.alpha_weight * pps_value - (1.0 - cfg.alpha_weight) * n_delta;
  };

  // k = 0 baseline: no mixture filtering at all.
  const pps::PpsResult base = pps::pps_block(quarter_frame, key, variables, cfg.pps);
  result.per_k[0] = KSelectionEntry{base.combined_avg, 0.0, score_of(base.combined_avg, 0.0)};

  Matrix features = quarter_frame.features(kGmmFeatures);
  const auto scaler = stats::robust_fit(features);
  stats::robust_apply_inplace(scaler, features);

  struct Candidate {
    int k = 0;
    bool ok = false;
    std::vector<bool> keep;
    KSelectionEntry entry;
  };
  std::vector<Candidate> candidates(cfg.k_candidates.size());
  parallel_for(cfg.k_candidates.size(), cfg.jobs, [&](std::size_t idx) {
    const int k = cfg.k_candidates[idx];
    Candidate& cand = candidates[idx];
    cand.k = k;
    gmm::EmConfig em = cfg.em;
    em.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(key.year * 4 + key.quarter),
                       static_cast<std::uint64_t>(k));
    try {
      const gmm::GmmModel model = gmm::gmm_fit(features, k, em);
      cand.keep = gmm::gmm_boxplot_keep(model, features, /*relaxed=*/false);
      const ScadaFrame survivors = quarter_frame.filtered(cand.keep);
      if (survivors.size() < cfg.pps.min_samples_per_quarter) return;  // over-aggressive k
      const pps::PpsResult scored = pps::pps_block(survivors, key, variables, cfg.pps);
      if (!scored.sufficient) return;
      const double n_delta =
          1.0 - static_cast<double>(survivors.size()) / static_cast<double>(n);
      cand.entry = KSelectionEntry{scored.combined_avg, n_delta,
                                   score_of(scored.combined_avg, n_delta)};
      cand.ok = true;
    } catch (const Error&) {
      cand.ok = false;  // degenerate fit: candidate k is not considered
    }
  });

  for (const Candidate& cand : candidates)
    if (cand.ok) result.per_k[cand.k] = cand.entry;
  // Ascending map order makes ties resolve to the smaller k, with the k = 0
  // baseline first.
  int best_k = 0;
  double best_score = result.per_k[0].score;
  for (const auto& [k, entry] : result.per_k) {
    if (entry.score > best_score) {
      best_score = entry.score;
      best_k = k;
    }
  }
  result.chosen_k = best_k;
  if (best_k == 0) return {quarter_frame, result};
  for (const Candidate& cand : candidates)
    if (cand.k == best_k) return {quarter_frame.filtered(cand.keep), result};
  return {quarter_frame, result};
}

std::vector<StablePeriod> stability_scan(const std::vector<pps::PpsResult>& series,
                                         int turbine_id, const NbFilterConfig& cfg,
                                         std::vector<QuarterStability>* detail) {
  std::vector<QuarterStability> status;
  status.reserve(series.size());
  std::vector<double> window;
  for (std::size_t i = 0; i < series.size(); ++i) {
    QuarterStability q;
    q.quarter = series[i].quarter;
    q.sufficient = series[i].sufficient;
    q.combined_pps = series[i].sufficient ? series[i].combined_avg : 0.0;

    window.clear();
    const std::size_t begin =
        i + 1 >= static_cast<std::size_t>(cfg.rolling_window)
            ? i + 1 - static_cast<std::size_t>(cfg.rolling_window)
            : 0;
    bool window_complete = true;
    for (std::size_t j = begin; j <= i; ++j) {
      if (!series[j].sufficient) window_complete = false;
      window.push_back(series[j].sufficient ? series[j].combined_avg : 0.0);
    }
    q.rolling_std = stats::sample_std(window);
    q.stable = q.sufficient && window_complete &&
               q.combined_pps > cfg.pps_stability_threshold &&
               q.rolling_std < cfg.rolling_std_threshold;
    status.push_back(q);
  }
  if (detail != nullptr) *detail = status;

  // A stable year requires all four quarters present and stable.
  std::map<int, std::pair<int, int>> per_year;  // year -> (quarters seen, quarters stable)
  for (const auto& q : status) {
    auto& [seen, stable] = per_year[q.quarter.year];
    ++seen;
    stable += q.stable ? 1 : 0;
  }
  std::vector<int> stable_years;
  for (const auto& [year, counts] : per_year)
    if (counts.first == 4 && counts.second == 4) stable_years.push_back(year);
  std::sort(stable_years.begin(), stable_years.end());

  std::vector<StablePeriod> periods;
  std::size_t i = 0;
  while (i < stable_years.size()) {
    std::size_t j = i;
    while (j + 1 < stable_years.size() && stable_years[j + 1] == stable_years[j] + 1) ++j;
    std::vector<int> run(stable_years.begin() + i, stable_years.begin() + j + 1);
    i = j + 1;

    if (cfg.clamp_nb_year) {
      // Trim the run so it starts on an allowed NB year.
      while (!run.empty() && run.front() != 2018 && run.front() != 2019)
        run.erase(run.begin());
    }
    if (static_cast<int>(run.size()) < cfg.min_stable_years) continue;
    if (run.front() > cfg.latest_period_start_year) continue;

    StablePeriod p;
    p.turbine_id = turbine_id;
    p.years = run;
    p.nb_year = run[0];
    p.reference_year = run[1];
    p.target_years.assign(run.begin() + 2, run.end());
    periods.push_back(std::move(p));
  }
  return periods;
}

PipelineResult run_nb_pipeline(const ScadaFrame& frame, const HardFilterConfig& hard_cfg,
                               const NbFilterConfig& nb_cfg) {
  nb_cfg.validate();
  PipelineResult out;

  HardFilterResult hard = apply_hard_filters(frame, hard_cfg);
  out.hard_report = hard.report;
  out.max_grid_power = hard.max_grid_power;

  StageResult stage = pitch_iqr_filter(hard.frame);
  out.stage_reports.push_back(stage.report);

  stage = mahalanobis_pitch_wind_filter(stage.frame, nb_cfg);
  out.stage_reports.push_back(stage.report);

  stage = hierarchical_wind_iqr_filter(stage.frame, nb_cfg);
  out.stage_reports.push_back(stage.report);

  VoteResult voted = sensor_vote_filter(stage.frame, nb_cfg);
  out.stage_reports.push_back(voted.report);

  // Per-quarter GMM filtering with multi-objective k-selection. Quarters are
  // independent; k-candidates within each quarter already parallelize, so the
  // quarter loop itself stays sequential and deterministic.
  const auto quarters = partition_quarters(voted.frame);
  std::size_t gmm_total = 0;
  std::size_t gmm_kept = 0;
  ScadaFrame merged;
  merged.turbine_id = frame.turbine_id;
  const bool with_labels = voted.frame.has_labels();
  for (const auto& [key, block] : quarters) {
    auto [survivors, selection] = select_k_and_filter(block, key, nb_cfg);
    gmm_total += block.size();
    gmm_kept += survivors.size();
    out.k_selection.push_back(selection);
    out.pps_series.push_back(
        pps::pps_block(survivors, key, explanatory_fields(), nb_cfg.pps));
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      std::array<double, kNumFields> values{};
      for (int f = 0; f < kNumFields; ++f) values[f] = survivors.fields[f][i];
      merged.push_back(survivors.time_min[i], values,
                       with_labels ? survivors.labels[i] : Label::Normal, with_labels);
    }
  }
  out.stage_reports.push_back(make_report("gmm_k_selection", gmm_total, gmm_kept,
                                          {{"gmm_boxplot", gmm_total - gmm_kept}}));

  out.stable_periods =
      stability_scan(out.pps_series, frame.turbine_id, nb_cfg, &out.stability);
  out.frame = std::move(merged);
  return out;
}

}  // namespace scadanb::nb
