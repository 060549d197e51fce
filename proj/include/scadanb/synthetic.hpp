#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scadanb/scada.hpp"

namespace scadanb {

struct RecalibrationEvent {
  std::int64_t time_min = 0;
  Field sensor = Field::BladeLoadB;
  double offset = 0.0;
};

/// Configuration of the synthetic SCADA generator. The generator is the
/// ground-truth source for pipeline recall/precision and drift-recovery
/// checks: every record carries a label, and identical (config, seed) pairs
/// produce bitwise-identical frames.
struct SyntheticConfig {
  std::uint64_t seed = 1;
  int turbine_id = 1;
  int start_year = 2017;
  int n_years = 4;
  int interval_minutes = 10;  // multiple of 10, keeps records on the 10-minute grid
  double rated_power = 2000.0;  // kW
  double cut_in = 4.0;          // m/s
  double cut_out = 25.0;        // m/s
  double rate_anomaly1 = 0.0;
  double rate_anomaly2 = 0.0;
  double rate_anomaly3 = 0.0;
  double rate_anomaly4 = 0.0;
  double degradation_rate = 0.0;  // fractional AEP loss per year since start
  double noise_scale = 0.01;      // power noise as a fraction of rated power
  std::vector<RecalibrationEvent> recalibrations;

  void validate() const;
};

/// Deterministic synthetic frame: sigmoidal power curve with a seasonal
/// temperature cycle, negative pitch and blade loads under normal operation,
/// the four injected anomaly classes, compounding yearly degradation and
/// optional sensor recalibration offsets. Labels record the ground truth.
ScadaFrame generate_synthetic(const SyntheticConfig& cfg);

/// One-line description of the baseline curve for the run manifest.
std::string synthetic_curve_note();

}  // namespace scadanb
