#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scadanb/experiments.hpp"
#include "scadanb/hard_filters.hpp"
#include "scadanb/rng.hpp"
#include "scadanb/synthetic.hpp"

using namespace scadanb;
using namespace scadanb::exp;

namespace {

// Hard-filtered degraded frame plus the stable period covering it. The
// synthetic data is clean apart from degradation, so hard filtering stands in
// for the full pipeline.
struct Fixture {
  ScadaFrame frame;
  nb::StablePeriod period;
};

Fixture make_fixture(std::uint64_t seed, double degradation, int n_years = 4,
                     int interval = 180) {
  SyntheticConfig cfg;
  cfg.seed = seed;
  cfg.start_year = 2018;
  cfg.n_years = n_years;
  cfg.interval_minutes = interval;
  cfg.degradation_rate = degradation;
  cfg.noise_scale = 0.005;
  const auto raw = generate_synthetic(cfg);
  Fixture fx;
  fx.frame = apply_hard_filters(raw, HardFilterConfig{}).frame;
  fx.period.turbine_id = raw.turbine_id;
  for (int y = 0; y < n_years; ++y) fx.period.years.push_back(2018 + y);
  fx.period.nb_year = 2018;
  fx.period.reference_year = 2019;
  for (int y = 2020; y < 2018 + n_years; ++y) fx.period.target_years.push_back(y);
  return fx;
}

ExperimentConfig fast_experiment(ml::ModelFamily family, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.tuner.n_trials = 1;
  cfg.tuner.seed = seed;
  ml::ModelSpec pin;
  pin.family = family;
  pin.gbt.n_trees = 120;
  pin.gbt.learning_rate = 0.12;
  pin.gbt.max_depth = 4;
  pin.gbt.lambda = 1.0;
  pin.forest.n_trees = 30;
  pin.forest.max_depth = 12;
  pin.forest.min_leaf = 2;
  pin.knn.k = 8;
  pin.knn.minkowski_p = 2;
  cfg.tuner.search_space = ml::SearchSpace::single_point(pin);
  cfg.cv.n_folds = 3;
  return cfg;
}

}  // namespace

TEST_CASE("experiment 1: exact in-sample retrieval gives zero drift in the NB year") {
  const auto fx = make_fixture(1, 0.0);
  auto cfg = fast_experiment(ml::ModelFamily::Knn, 1);
  ml::ModelSpec pin;
  pin.family = ml::ModelFamily::Knn;
  pin.knn.k = 1;
  cfg.tuner.search_space = ml::SearchSpace::single_point(pin);
  const auto report =
      run_experiment1(fx.frame, fx.period, FeatureSetKind::All, ml::ModelFamily::Knn, cfg);
  REQUIRE(!report.per_year.empty());
  CHECK(report.per_year[0].year == 2018);
  // k=1 retrieval on the training rows reproduces each target exactly.
  CHECK(report.per_year[0].delta == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(report.per_year[0].mae == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("experiment 1: reference-year drift offset is identically zero") {
  const auto fx = make_fixture(2, 0.02);
  const auto cfg = fast_experiment(ml::ModelFamily::Gbt, 2);
  const auto report =
      run_experiment1(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Gbt, cfg);
  bool saw_reference = false;
  for (const auto& ys : report.per_year) {
    if (ys.year == fx.period.reference_year) {
      CHECK(ys.drift_delta == 0.0);
      saw_reference = true;
    }
  }
  CHECK(saw_reference);
}

TEST_CASE("experiment 1: null data yields near-zero target drift") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto fx = make_fixture(seed, 0.0);
    const auto cfg = fast_experiment(ml::ModelFamily::Gbt, seed);
    const auto report =
        run_experiment1(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Gbt, cfg);
    for (const auto& ys : report.per_year)
      if (ys.year > fx.period.reference_year) CHECK(std::fabs(ys.drift_delta) < 0.5);
  }
}

TEST_CASE("experiment 1: injected degradation is recovered with the PC features") {
  const double rate = 0.02;
  const auto fx = make_fixture(6, rate);
  const auto cfg = fast_experiment(ml::ModelFamily::Gbt, 6);
  const auto report =
      run_experiment1(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Gbt, cfg);
  double prev_drift = 0.0;
  for (const auto& ys : report.per_year) {
    if (ys.year <= fx.period.reference_year) continue;
    const int k = ys.year - fx.period.reference_year;
    const double injected = -100.0 * (1.0 - std::pow(1.0 - rate, k));
    CHECK(std::fabs(ys.drift_delta - injected) < 0.75);
    CHECK(ys.drift_delta < prev_drift);  // monotone decline
    prev_drift = ys.drift_delta;
  }
}

TEST_CASE("experiment 1 never reads rows outside the NB year while fitting") {
  // Corrupting every post-NB-year row must leave the NB-year stats bit-equal.
  const auto fx = make_fixture(7, 0.0);
  auto wild = fx.frame;
  const auto nb_end = epoch_min_from_civil(CivilTime{2019, 1, 1, 0, 0, 0});
  for (std::size_t i = 0; i < wild.size(); ++i) {
    if (wild.time_min[i] >= nb_end) {
      for (int f = 0; f < kNumFields; ++f) wild.fields[f][i] *= 1000.0;
    }
  }
  const auto cfg = fast_experiment(ml::ModelFamily::Gbt, 7);
  const auto a =
      run_experiment1(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Gbt, cfg);
  const auto b =
      run_experiment1(wild, fx.period, FeatureSetKind::PC, ml::ModelFamily::Gbt, cfg);
  REQUIRE(!a.per_year.empty());
  REQUIRE(!b.per_year.empty());
  CHECK(a.per_year[0].year == 2018);
  CHECK(b.per_year[0].year == 2018);
  CHECK(a.per_year[0].delta == b.per_year[0].delta);
  CHECK(a.per_year[0].mae == b.per_year[0].mae);
  CHECK(a.per_year[0].mape == b.per_year[0].mape);
}

TEST_CASE("experiment reports are reproducible bit for bit") {
  const auto fx = make_fixture(8, 0.02);
  const auto cfg = fast_experiment(ml::ModelFamily::Forest, 8);
  const auto a =
      run_experiment1(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Forest, cfg);
  const auto b =
      run_experiment1(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Forest, cfg);
  REQUIRE(a.per_year.size() == b.per_year.size());
  for (std::size_t i = 0; i < a.per_year.size(); ++i) {
    CHECK(a.per_year[i].delta == b.per_year[i].delta);
    CHECK(a.per_year[i].mae == b.per_year[i].mae);
    CHECK(a.per_year[i].mape == b.per_year[i].mape);
  }
}

TEST_CASE("sensitivity dataset: one replica per post-NB row, only Year changes") {
  Matrix x(6, 3);
  std::vector<double> y = {10, 11, 12, 13, 14, 15};
  std::vector<int> years = {2018, 2018, 2019, 2019, 2020, 2020};
  for (std::size_t i = 0; i < 6; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = 100.0 + static_cast<double>(i);
    x(i, 2) = static_cast<double>(years[i]);
  }
  const auto sens =
      build_sensitivity_dataset(x, y, years, 2018, 2, ReplicationPolicy::PerRow);
  REQUIRE(sens.features.rows() == 4);  // rows of 2019 and 2020
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t src = sens.source_row[i];
    CHECK(sens.features(i, 0) == x(src, 0));
    CHECK(sens.features(i, 1) == x(src, 1));
    CHECK(sens.features(i, 2) == 2018.0);  // substituted
    CHECK(sens.actual[i] == y[src]);
    CHECK(sens.source_year[i] == years[src]);
  }
}

TEST_CASE("sensitivity dataset: equal-count policy balances source years") {
  const std::size_t n = 90;
  Matrix x(n, 1);
  std::vector<double> y(n);
  std::vector<int> years(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = static_cast<double>(i);
    y[i] = static_cast<double>(i);
    years[i] = i < 30 ? 2018 : (i < 50 ? 2019 : 2020);  // 20 vs 40 post-NB rows
  }
  const auto sens =
      build_sensitivity_dataset(x, y, years, 2018, 0, ReplicationPolicy::EqualCountPerYear);
  std::size_t c2019 = 0, c2020 = 0;
  for (int year : sens.source_year) {
    if (year == 2019) ++c2019;
    if (year == 2020) ++c2020;
  }
  CHECK(c2019 == c2020);
  CHECK(c2019 == 20);
}

TEST_CASE("experiment 2: null data yields near-zero per-year drift") {
  // Median over seeds; a single draw of the yearly low-power tail can push
  // one year's score past the bound by sampling noise alone.
  std::vector<double> worst_abs_delta;
  for (std::uint64_t seed : {9u, 10u, 19u}) {
    const auto fx = make_fixture(seed, 0.0);
    const auto cfg = fast_experiment(ml::ModelFamily::Gbt, seed);
    const auto report =
        run_experiment2(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Gbt, cfg);
    double worst = 0.0;
    for (const auto& ys : report.per_year)
      if (ys.year > fx.period.nb_year) worst = std::max(worst, std::fabs(ys.delta));
    worst_abs_delta.push_back(worst);
  }
  std::sort(worst_abs_delta.begin(), worst_abs_delta.end());
  CHECK(worst_abs_delta[1] < 0.5);   // median seed
  CHECK(worst_abs_delta.back() < 1.0);
}

TEST_CASE("experiment 2 agrees with experiment 1 on degradation-only data") {
  const auto fx = make_fixture(11, 0.02);
  for (ml::ModelFamily family : {ml::ModelFamily::Gbt, ml::ModelFamily::Knn}) {
    const auto cfg = fast_experiment(family, 11);
    const auto exp1 =
        run_experiment1(fx.frame, fx.period, FeatureSetKind::PC, family, cfg);
    const auto exp2 =
        run_experiment2(fx.frame, fx.period, FeatureSetKind::PC, family, cfg);
    for (const auto& y2 : exp2.per_year) {
      if (y2.year <= fx.period.nb_year) continue;
      for (const auto& y1 : exp1.per_year) {
        if (y1.year != y2.year) continue;
        CHECK(std::fabs(y1.delta - y2.delta) < 1.0);
      }
    }
  }
}

TEST_CASE("experiment 2: in-sample reference MAPE is reported") {
  const auto fx = make_fixture(12, 0.01);
  const auto cfg = fast_experiment(ml::ModelFamily::Gbt, 12);
  const auto report =
      run_experiment2(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Gbt, cfg);
  bool saw_reference = false;
  for (const auto& ys : report.per_year) {
    if (ys.year == fx.period.reference_year) {
      CHECK(ys.mape > 0.0);
      CHECK(ys.mape < 50.0);
      saw_reference = true;
    }
  }
  CHECK(saw_reference);
}

TEST_CASE("summarize: classification rule and counting") {
  std::vector<DriftReport> reports(3);
  for (int i = 0; i < 3; ++i) {
    reports[i].turbine_id = i + 1;
    YearStats ys;
    ys.year = 2021;
    reports[i].per_year.push_back(ys);
  }
  reports[0].per_year.back().drift_delta = -2.1;
  reports[1].per_year.back().drift_delta = 1.0;
  reports[2].per_year.back().drift_delta = -0.3;
  const auto summary = summarize(reports);
  CHECK(summary.decline == 1);
  CHECK(summary.improve == 1);
  CHECK(summary.no_change == 1);
  CHECK(summary.total() == 3);

  std::vector<DriftReport> flat(4);
  for (auto& r : flat) {
    YearStats ys;
    ys.drift_delta = 0.0;
    r.per_year.push_back(ys);
  }
  const auto all_flat = summarize(flat);
  CHECK(all_flat.no_change == 4);
  CHECK(all_flat.total() == 4);
}

TEST_CASE("experiments raise on starved inputs") {
  const auto fx = make_fixture(13, 0.0, 4, 1440);  // daily grid: sparse rows
  auto cfg = fast_experiment(ml::ModelFamily::Gbt, 13);
  cfg.min_rows = 100000;
  CHECK_THROWS_AS(
      run_experiment1(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Gbt, cfg),
      InsufficientDataError);
  CHECK_THROWS_AS(
      run_experiment2(fx.frame, fx.period, FeatureSetKind::PC, ml::ModelFamily::Gbt, cfg),
      InsufficientDataError);
}
