#include "scadanb/hard_filters.hpp"

#include <algorithm>

namespace scadanb {

void HardFilterConfig::validate() const {
  if (!(power_floor_frac > 0.0 && power_floor_frac < nominal_power_frac &&
        nominal_power_frac < 1.0))
    throw InvalidConfigError("hard filters: 0 < power_floor < nominal_power < 1");
  if (!(cut_in_speed < cut_out_speed))
    throw InvalidConfigError("hard filters: cut_in < cut_out");
}

HardFilterResult apply_hard_filters(const ScadaFrame& frame, const HardFilterConfig& cfg) {
  if (frame.size() == 0) throw EmptyFrameError("apply_hard_filters");
  const auto& power = frame.column(Field::GridPower);
  const double max_power = *std::max_element(power.begin(), power.end());
  return apply_hard_filters(frame, cfg, max_power);
}

HardFilterResult apply_hard_filters(const ScadaFrame& frame, const HardFilterConfig& cfg,
                                    double frozen_max_power) {
  cfg.validate();
  if (frame.size() == 0) throw EmptyFrameError("apply_hard_filters");
  if (!(frozen_max_power > 0.0))
    throw InvalidConfigError("apply_hard_filters: max grid power must be positive");

  const auto& amb = frame.column(Field::AmbTemp);
  const auto& la = frame.column(Field::BladeLoadA);
  const auto& lb = frame.column(Field::BladeLoadB);
  const auto& lc = frame.column(Field::BladeLoadC);
  const auto& pa = frame.column(Field::PitchAngleA);
  const auto& pb = frame.column(Field::PitchAngleB);
  const auto& pc = frame.column(Field::PitchAngleC);
  const auto& power = frame.column(Field::GridPower);
  const auto& ws = frame.column(Field::WindSpeed);

  const double nominal_cut = cfg.nominal_power_frac * frozen_max_power;
  const double power_floor = cfg.power_floor_frac * frozen_max_power;

  enum Rule { AmbTemp = 0, BladeLoad, YearRange, Curtailment, NominalPower, CutIn, CutOut, kRules };
  static const char* kRuleNames[kRules] = {"amb_temp", "blade_load",    "year",
                                           "curtailment", "nominal_power", "cut_in",
                                           "cut_out"};
  std::array<std::size_t, kRules> removed{};
  std::vector<bool> keep(frame.size(), false);

  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (amb[i] < cfg.amb_temp_min) {
      ++removed[AmbTemp];
    } else if (la[i] > 0.0 || lb[i] > 0.0 || lc[i] > 0.0) {
      ++removed[BladeLoad];
    } else if (year_of(frame.time_min[i]) >= cfg.max_year_exclusive) {
      ++removed[YearRange];
    } else if (pa[i] > 0.0 || pb[i] > 0.0 || pc[i] > 0.0) {
      ++removed[Curtailment];
    } else if (power[i] > nominal_cut) {
      ++removed[NominalPower];
    } else if (!(ws[i] >= cfg.cut_in_speed || power[i] >= power_floor)) {
      ++removed[CutIn];
    } else if (ws[i] > cfg.cut_out_speed) {
      ++removed[CutOut];
    } else {
      keep[i] = true;
    }
  }

  HardFilterResult result;
  result.frame = frame.filtered(keep);
  result.max_grid_power = frozen_max_power;
  result.report.stage = "hard_filters";
  result.report.total = frame.size();
  result.report.kept = result.frame.size();
  for (int r = 0; r < kRules; ++r)
    result.report.removed_by_rule.emplace_back(kRuleNames[r], removed[r]);
  return result;
}

}  // namespace scadanb
