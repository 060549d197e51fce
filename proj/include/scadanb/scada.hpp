#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scadanb/errors.hpp"
#include "scadanb/matrix.hpp"

namespace scadanb {

/// Numeric signal columns of a SCADA record. Time and the turbine id are kept
/// separately; WSE is carried through the pipeline but never used as a
/// feature.
enum class Field : int {
  AmbTemp = 0,
  BladeLoadA,
  BladeLoadB,
  BladeLoadC,
  GridPower,
  WindSpeed,
  PitchAngleA,
  PitchAngleB,
  PitchAngleC,
  WdAbs,
  WindDirRel,
  Wse,
};

inline constexpr int kNumFields = 12;

const std::string& field_name(Field f);
Field field_from_name(const std::string& name);

/// All explanatory variables: every signal except GridPower (the target) and
/// WSE (excluded from the study).
std::span<const Field> explanatory_fields();

enum class Label : std::uint8_t {
  Normal = 0,
  Anomaly1,  // zero power above cut-in
  Anomaly2,  // below-rated plateau
  Anomaly3,  // scattered point anomalies
  Anomaly4,  // high-wind derating tail
  Recalibration,
};

const std::string& label_name(Label l);
Label label_from_name(const std::string& name);

/// Columnar table of 10-minute records for one turbine. Records are sorted by
/// time with no duplicate timestamps; ground-truth labels are present only on
/// synthetic frames.
struct ScadaFrame {
  int turbine_id = 0;
  std::vector<std::int64_t> time_min;  // minutes since the Unix epoch, UTC
  std::array<std::vector<double>, kNumFields> fields;
  std::vector<Label> labels;  // empty for real data

  std::size_t size() const { return time_min.size(); }
  bool has_labels() const { return !labels.empty(); }

  std::vector<double>& column(Field f) { return fields[static_cast<int>(f)]; }
  const std::vector<double>& column(Field f) const { return fields[static_cast<int>(f)]; }

  void reserve(std::size_t n);
  void push_back(std::int64_t time, const std::array<double, kNumFields>& values,
                 Label label, bool with_label);

  /// New frame holding the records where keep[i] is true, in order.
  ScadaFrame filtered(const std::vector<bool>& keep) const;

  /// Feature matrix for the given columns, one row per record.
  Matrix features(std::span<const Field> cols) const;
};

struct QuarterKey {
  int year = 0;
  int quarter = 0;  // 1..4

  auto operator<=>(const QuarterKey&) const = default;
};

std::string quarter_label(const QuarterKey& k);

// Calendar helpers (UTC). Epoch minutes <-> civil date-time.
struct CivilTime {
  int year, month, day, hour, minute, second;
};

CivilTime civil_from_epoch_min(std::int64_t minutes);
std::int64_t epoch_min_from_civil(const CivilTime& c);
int year_of(std::int64_t epoch_min);
QuarterKey quarter_of(std::int64_t epoch_min);

/// Split a frame into calendar quarters. Every record lands in exactly one
/// bucket; the union reproduces the frame.
std::map<QuarterKey, ScadaFrame> partition_quarters(const ScadaFrame& frame);

}  // namespace scadanb
