#pragma once

#include <map>
#include <string>
#include <vector>

#include "scadanb/scada.hpp"

namespace scadanb {

/// Rule thresholds for the hard-filter pass. Defaults follow the published
/// filter table.
struct HardFilterConfig {
  double amb_temp_min = -10.0;
  int max_year_exclusive = 2024;
  double nominal_power_frac = 0.95;
  double cut_in_speed = 5.0;
  double power_floor_frac = 0.05;
  double cut_out_speed = 20.0;

  void validate() const;
};

struct FilterReport {
  std::string stage;
  std::vector<std::pair<std::string, std::size_t>> removed_by_rule;  // in rule order
  std::size_t kept = 0;
  std::size_t total = 0;

  std::size_t removed_total() const {
    std::size_t n = 0;
    for (const auto& [rule, count] : removed_by_rule) n += count;
    return n;
  }
};

struct HardFilterResult {
  ScadaFrame frame;
  FilterReport report;
  double max_grid_power = 0.0;  // frozen from the raw frame; keeps the pass idempotent
};

/// Keep a record only if every rule holds: AmbTemp >= -10, all blade loads
/// <= 0, year < 2024, all pitch angles <= 0, GridPower <= 95% of the raw
/// frame's max, (WindSpeed >= 5 or GridPower >= 5% of max), WindSpeed <= 20.
/// Removal is attributed to the first failing rule in that order.
HardFilterResult apply_hard_filters(const ScadaFrame& frame, const HardFilterConfig& cfg);

/// Same rules against an externally frozen max power (re-applying a report's
/// recorded max reproduces the original pass).
HardFilterResult apply_hard_filters(const ScadaFrame& frame, const HardFilterConfig& cfg,
                                    double frozen_max_power);

}  // namespace scadanb
