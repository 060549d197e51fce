#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scadanb/csv.hpp"
#include "scadanb/hard_filters.hpp"
#include "scadanb/synthetic.hpp"

using namespace scadanb;

namespace {

// One hand-built record; values chosen to pass every rule unless overridden.
ScadaFrame frame_with(const std::vector<std::array<double, kNumFields>>& rows) {
  ScadaFrame frame;
  frame.turbine_id = 1;
  std::int64_t t = parse_iso8601_min("2018-06-01T00:00:00Z");
  for (const auto& row : rows) {
    frame.push_back(t, row, Label::Normal, false);
    t += 10;
  }
  return frame;
}

std::array<double, kNumFields> good_record(double power = 800.0, double ws = 8.0) {
  std::array<double, kNumFields> v{};
  v[static_cast<int>(Field::AmbTemp)] = 10.0;
  v[static_cast<int>(Field::BladeLoadA)] = -60.0;
  v[static_cast<int>(Field::BladeLoadB)] = -60.0;
  v[static_cast<int>(Field::BladeLoadC)] = -60.0;
  v[static_cast<int>(Field::GridPower)] = power;
  v[static_cast<int>(Field::WindSpeed)] = ws;
  v[static_cast<int>(Field::PitchAngleA)] = -2.0;
  v[static_cast<int>(Field::PitchAngleB)] = -2.0;
  v[static_cast<int>(Field::PitchAngleC)] = -2.0;
  v[static_cast<int>(Field::WdAbs)] = 180.0;
  v[static_cast<int>(Field::WindDirRel)] = 0.0;
  v[static_cast<int>(Field::Wse)] = 8.0;
  return v;
}

std::size_t rule_count(const FilterReport& report, const std::string& rule) {
  for (const auto& [name, count] : report.removed_by_rule)
    if (name == rule) return count;
  return 0;
}

}  // namespace

TEST_CASE("each rule removes its record and attribution is first-match") {
  auto r_cold = good_record();
  r_cold[static_cast<int>(Field::AmbTemp)] = -15.0;
  auto r_load = good_record();
  r_load[static_cast<int>(Field::BladeLoadB)] = 5.0;
  auto r_pitch = good_record();
  r_pitch[static_cast<int>(Field::PitchAngleC)] = 1.0;
  auto r_cutout = good_record(800.0, 25.0);
  auto r_keep = good_record();
  // max power comes from one plateau record at 2000.
  auto r_max = good_record(2000.0, 14.0);

  const auto frame = frame_with({r_cold, r_load, r_pitch, r_cutout, r_keep, r_max});
  const auto result = apply_hard_filters(frame, HardFilterConfig{});
  CHECK(result.max_grid_power == 2000.0);
  CHECK(rule_count(result.report, "amb_temp") == 1);
  CHECK(rule_count(result.report, "blade_load") == 1);
  CHECK(rule_count(result.report, "curtailment") == 1);
  CHECK(rule_count(result.report, "cut_out") == 1);
  CHECK(rule_count(result.report, "nominal_power") == 1);  // the 2000 kW record itself
  CHECK(result.report.kept == 1);
  CHECK(result.report.kept + result.report.removed_total() == result.report.total);
}

TEST_CASE("year rule removes 2024 and later") {
  ScadaFrame frame;
  frame.turbine_id = 1;
  frame.push_back(parse_iso8601_min("2023-12-31T23:50:00Z"), good_record(), Label::Normal,
                  false);
  frame.push_back(parse_iso8601_min("2024-01-01T00:00:00Z"), good_record(), Label::Normal,
                  false);
  frame.push_back(parse_iso8601_min("2024-01-01T00:10:00Z"), good_record(2000.0, 14.0),
                  Label::Normal, false);
  const auto result = apply_hard_filters(frame, HardFilterConfig{});
  CHECK(rule_count(result.report, "year") == 2);
  CHECK(result.report.kept == 1);
}

TEST_CASE("cut-in disjunction: low wind passes only with enough power") {
  auto r_low_both = good_record(0.01 * 2000.0, 3.0);   // removed
  auto r_low_wind = good_record(0.06 * 2000.0, 3.0);   // kept via the power branch
  auto r_max = good_record(2000.0, 14.0);
  const auto frame = frame_with({r_low_both, r_low_wind, r_max});
  const auto result = apply_hard_filters(frame, HardFilterConfig{});
  CHECK(rule_count(result.report, "cut_in") == 1);
  CHECK(result.report.kept == 1);
  CHECK(result.frame.column(Field::GridPower)[0] == doctest::Approx(120.0));
}

TEST_CASE("idempotence with the frozen maximum") {
  SyntheticConfig cfg;
  cfg.seed = 31;
  cfg.start_year = 2018;
  cfg.n_years = 1;
  cfg.interval_minutes = 60;
  cfg.rate_anomaly2 = 0.05;
  cfg.rate_anomaly4 = 0.05;
  const auto frame = generate_synthetic(cfg);
  const auto once = apply_hard_filters(frame, HardFilterConfig{});
  const auto twice = apply_hard_filters(once.frame, HardFilterConfig{}, once.max_grid_power);
  CHECK(twice.frame.size() == once.frame.size());
  CHECK(twice.frame.time_min == once.frame.time_min);
}

TEST_CASE("output frame satisfies the kept-region invariants") {
  SyntheticConfig cfg;
  cfg.seed = 77;
  cfg.start_year = 2018;
  cfg.n_years = 1;
  cfg.interval_minutes = 30;
  cfg.rate_anomaly1 = 0.03;
  cfg.rate_anomaly2 = 0.03;
  cfg.rate_anomaly3 = 0.03;
  cfg.rate_anomaly4 = 0.03;
  const auto frame = generate_synthetic(cfg);
  const HardFilterConfig hard;
  const auto result = apply_hard_filters(frame, hard);
  REQUIRE(result.frame.size() > 0);
  const auto& out = result.frame;
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out.column(Field::BladeLoadA)[i] <= 0.0);
    CHECK(out.column(Field::BladeLoadB)[i] <= 0.0);
    CHECK(out.column(Field::BladeLoadC)[i] <= 0.0);
    CHECK(out.column(Field::PitchAngleA)[i] <= 0.0);
    CHECK(out.column(Field::PitchAngleB)[i] <= 0.0);
    CHECK(out.column(Field::PitchAngleC)[i] <= 0.0);
    CHECK(out.column(Field::WindSpeed)[i] <= hard.cut_out_speed);
    CHECK(out.column(Field::GridPower)[i] <=
          hard.nominal_power_frac * result.max_grid_power);
    const bool cut_in_ok =
        out.column(Field::WindSpeed)[i] >= hard.cut_in_speed ||
        out.column(Field::GridPower)[i] >= hard.power_floor_frac * result.max_grid_power;
    CHECK(cut_in_ok);
  }
}

TEST_CASE("every positive-pitch type-2 record is removed") {
  SyntheticConfig cfg;
  cfg.seed = 13;
  cfg.start_year = 2018;
  cfg.n_years = 1;
  cfg.interval_minutes = 30;
  cfg.rate_anomaly2 = 0.08;
  const auto frame = generate_synthetic(cfg);
  const auto result = apply_hard_filters(frame, HardFilterConfig{});
  // Recall of type-2 with any positive pitch must be 100%.
  for (std::size_t i = 0; i < result.frame.size(); ++i) {
    if (result.frame.labels[i] != Label::Anomaly2) continue;
    CHECK(result.frame.column(Field::PitchAngleA)[i] <= 0.0);
    CHECK(result.frame.column(Field::PitchAngleB)[i] <= 0.0);
    CHECK(result.frame.column(Field::PitchAngleC)[i] <= 0.0);
  }
}

TEST_CASE("empty frame and bad config raise") {
  ScadaFrame empty;
  CHECK_THROWS_AS(apply_hard_filters(empty, HardFilterConfig{}), EmptyFrameError);
  HardFilterConfig bad;
  bad.power_floor_frac = 0.99;
  const auto frame = frame_with({good_record()});
  CHECK_THROWS_AS(apply_hard_filters(frame, bad), InvalidConfigError);
}
