#include "scadanb/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

namespace scadanb {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

bool parse_int(const std::string& text, int& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

struct Row {
  std::int64_t time;
  std::array<double, kNumFields> values;
  Label label;
};

}  // namespace

std::int64_t parse_iso8601_min(const std::string& text) {
  // YYYY-MM-DDTHH:MM[:SS][Z]
  CivilTime c{};
  int matched = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &c.year, &c.month, &c.day,
                            &c.hour, &c.minute, &c.second);
  if (matched < 5) throw Error("bad timestamp: " + text);
  if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31 || c.hour > 23 || c.minute > 59)
    throw Error("bad timestamp: " + text);
  return epoch_min_from_civil(c);
}

std::string format_iso8601_min(std::int64_t epoch_min) {
  const CivilTime c = civil_from_epoch_min(epoch_min);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:00Z", c.year, c.month, c.day,
                c.hour, c.minute);
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<ScadaFrame> load_csv(const std::filesystem::path& path, bool schema_strict,
                                 LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw EmptyInputError(path.string());

  const auto header = split_line(line);
  // Column positions: Time, TurbineId, the twelve signals, optional Label.
  const std::vector<std::string> required = {
      "Time",        "TurbineId",   "AmbTemp",     "BladeLoadA", "BladeLoadB",
      "BladeLoadC",  "GridPower",   "WindSpeed",   "PitchAngleA", "PitchAngleB",
      "PitchAngleC", "WdAbs",       "WindDirRel",  "WSE"};
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos[header[i]] = i;
  for (const auto& name : required)
    if (!pos.count(name)) throw MissingColumnError(name);
  const bool has_label = pos.count("Label") > 0;

  const std::size_t time_col = pos["Time"];
  const std::size_t id_col = pos["TurbineId"];
  std::array<std::size_t, kNumFields> field_col{};
  for (int f = 0; f < kNumFields; ++f)
    field_col[f] = pos[field_name(static_cast<Field>(f))];
  const std::size_t label_col = has_label ? pos["Label"] : 0;

  LoadReport rep;
  std::map<int, std::vector<Row>> by_turbine;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    ++rep.rows_read;
    const auto cells = split_line(line);
    const auto fail = [&](const std::string& col, const std::string& why) {
      if (schema_strict) throw ParseError(row_no, col, why);
      ++rep.rows_dropped;
    };
    if (cells.size() < required.size()) {
      fail("(row)", "too few cells");
      continue;
    }
    Row row{};
    int turbine = 0;
    if (!parse_int(cells[id_col], turbine)) {
      fail("TurbineId", "not an integer");
      continue;
    }
    try {
      row.time = parse_iso8601_min(cells[time_col]);
    } catch (const Error&) {
      fail("Time", "bad timestamp");
      continue;
    }
    bool ok = true;
    std::string bad_col;
    for (int f = 0; f < kNumFields && ok; ++f) {
      if (!parse_double(cells[field_col[f]], row.values[f])) {
        ok = false;
        bad_col = field_name(static_cast<Field>(f));
      }
    }
    if (ok) {
      // Domain invariants checked at ingestion.
      const double ws = row.values[static_cast<int>(Field::WindSpeed)];
      const double wd = row.values[static_cast<int>(Field::WdAbs)];
      if (ws < 0.0) {
        ok = false;
        bad_col = "WindSpeed";
      } else if (wd < 0.0 || wd >= 360.0) {
        ok = false;
        bad_col = "WdAbs";
      }
    }
    if (!ok) {
      fail(bad_col, "unparseable or out-of-range value");
      continue;
    }
    row.label = Label::Normal;
    if (has_label) {
      try {
        row.label = label_from_name(cells[label_col]);
      } catch (const Error&) {
        fail("Label", "unknown label");
        continue;
      }
    }
    by_turbine[turbine].push_back(row);
  }
  if (by_turbine.empty()) throw EmptyInputError(path.string());

  std::vector<ScadaFrame> frames;
  frames.reserve(by_turbine.size());
  for (auto& [id, rows] : by_turbine) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.time < b.time; });
    ScadaFrame frame;
    frame.turbine_id = id;
    frame.reserve(rows.size());
    std::int64_t last_time = std::numeric_limits<std::int64_t>::min();
    for (const Row& row : rows) {
      if (row.time == last_time) {
        ++rep.duplicates_dropped;  // keep the first record of a duplicate stamp
        continue;
      }
      last_time = row.time;
      frame.push_back(row.time, row.values, row.label, has_label);
    }
    frames.push_back(std::move(frame));
  }
  if (report != nullptr) *report = rep;
  return frames;
}

void write_csv(const std::filesystem::path& path, const std::vector<ScadaFrame>& frames) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const bool with_label =
      !frames.empty() && std::all_of(frames.begin(), frames.end(),
                                     [](const ScadaFrame& f) { return f.has_labels(); });
  out << "Time,TurbineId,AmbTemp,BladeLoadA,BladeLoadB,BladeLoadC,GridPower,WindSpeed,"
         "PitchAngleA,PitchAngleB,PitchAngleC,WdAbs,WindDirRel,WSE";
  if (with_label) out << ",Label";
  out << "\n";
  for (const auto& frame : frames) {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      out << format_iso8601_min(frame.time_min[i]) << ',' << frame.turbine_id;
      for (int f = 0; f < kNumFields; ++f) out << ',' << format_double(frame.fields[f][i]);
      if (with_label) out << ',' << label_name(frame.labels[i]);
      out << "\n";
    }
  }
}

void write_csv(const std::filesystem::path& path, const ScadaFrame& frame) {
  write_csv(path, std::vector<ScadaFrame>{frame});
}

}  // namespace scadanb
