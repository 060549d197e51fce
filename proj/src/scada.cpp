#include "scadanb/scada.hpp"

#include <algorithm>

namespace scadanb {
namespace {

const std::array<std::string, kNumFields> kFieldNames = {
    "AmbTemp",     "BladeLoadA",  "BladeLoadB",  "BladeLoadC",
    "GridPower",   "WindSpeed",   "PitchAngleA", "PitchAngleB",
    "PitchAngleC", "WdAbs",       "WindDirRel",  "WSE"};

const std::array<std::string, 6> kLabelNames = {
    "normal", "anomaly1", "anomaly2", "anomaly3", "anomaly4", "recalibration"};

constexpr std::array<Field, 10> kExplanatory = {
    Field::AmbTemp,     Field::BladeLoadA,  Field::BladeLoadB, Field::BladeLoadC,
    Field::WindSpeed,   Field::PitchAngleA, Field::PitchAngleB,
    Field::PitchAngleC, Field::WdAbs,       Field::WindDirRel};

}  // namespace

const std::string& field_name(Field f) { return kFieldNames[static_cast<int>(f)]; }

Field field_from_name(const std::string& name) {
  for (int i = 0; i < kNumFields; ++i)
    if (kFieldNames[i] == name) return static_cast<Field>(i);
  throw MissingColumnError(name);
}

std::span<const Field> explanatory_fields() { return kExplanatory; }

const std::string& label_name(Label l) { return kLabelNames[static_cast<int>(l)]; }

Label label_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i)
    if (kLabelNames[i] == name) return static_cast<Label>(i);
  throw Error("unknown label: " + name);
}

void ScadaFrame::reserve(std::size_t n) {
  time_min.reserve(n);
  for (auto& f : fields) f.reserve(n);
}

void ScadaFrame::push_back(std::int64_t time, const std::array<double, kNumFields>& values,
                           Label label, bool with_label) {
  time_min.push_back(time);
  for (int i = 0; i < kNumFields; ++i) fields[i].push_back(values[i]);
  if (with_label) labels.push_back(label);
}

ScadaFrame ScadaFrame::filtered(const std::vector<bool>& keep) const {
  ScadaFrame out;
  out.turbine_id = turbine_id;
  std::size_t count = 0;
  for (bool k : keep) count += k ? 1 : 0;
  out.reserve(count);
  if (has_labels()) out.labels.reserve(count);
  for (std::size_t i = 0; i < size(); ++i) {
    if (!keep[i]) continue;
    out.time_min.push_back(time_min[i]);
    for (int f = 0; f < kNumFields; ++f) out.fields[f].push_back(fields[f][i]);
    if (has_labels()) out.labels.push_back(labels[i]);
  }
  return out;
}

Matrix ScadaFrame::features(std::span<const Field> cols) const {
  Matrix out(size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& src = column(cols[c]);
    for (std::size_t r = 0; r < size(); ++r) out(r, c) = src[r];
  }
  return out;
}

std::string quarter_label(const QuarterKey& k) {
  return std::to_string(k.year) + "Q" + std::to_string(k.quarter);
}

namespace {

// Howard Hinnant's civil date algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

CivilTime civil_from_epoch_min(std::int64_t minutes) {
  std::int64_t days = minutes / 1440;
  std::int64_t rem = minutes % 1440;
  if (rem < 0) {
    rem += 1440;
    days -= 1;
  }
  CivilTime c{};
  civil_from_days(days, c.year, c.month, c.day);
  c.hour = static_cast<int>(rem / 60);
  c.minute = static_cast<int>(rem % 60);
  c.second = 0;
  return c;
}

std::int64_t epoch_min_from_civil(const CivilTime& c) {
  return days_from_civil(c.year, c.month, c.day) * 1440 + c.hour * 60 + c.minute;
}

int year_of(std::int64_t epoch_min) { return civil_from_epoch_min(epoch_min).year; }

QuarterKey quarter_of(std::int64_t epoch_min) {
  const CivilTime c = civil_from_epoch_min(epoch_min);
  return QuarterKey{c.year, (c.month - 1) / 3 + 1};
}

std::map<QuarterKey, ScadaFrame> partition_quarters(const ScadaFrame& frame) {
  if (frame.size() == 0) throw EmptyFrameError("partition_quarters");
  std::map<QuarterKey, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < frame.size(); ++i)
    buckets[quarter_of(frame.time_min[i])].push_back(i);
  std::map<QuarterKey, ScadaFrame> out;
  for (const auto& [key, index] : buckets) {
    std::vector<bool> keep(frame.size(), false);
    for (std::size_t i : index) keep[i] = true;
    out.emplace(key, frame.filtered(keep));
  }
  return out;
}

}  // namespace scadanb
