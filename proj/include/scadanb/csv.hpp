#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scadanb/scada.hpp"

namespace scadanb {

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;  // unparseable or invariant-violating rows (lax mode)
  std::size_t duplicates_dropped = 0;
};

/// Read one CSV file into per-turbine frames, sorted by turbine id and, within
/// each frame, by time. In lax mode bad rows are dropped and counted; in
/// strict mode the first bad cell raises ParseError. A Label column, when
/// present, is read back into the frames.
std::vector<ScadaFrame> load_csv(const std::filesystem::path& path, bool schema_strict,
                                 LoadReport* report = nullptr);

/// Write frames in the canonical column order. Synthetic frames (those with
/// labels) gain a trailing Label column. Numeric cells use the shortest
/// representation that round-trips, so load(write(f)) is value-exact.
void write_csv(const std::filesystem::path& path, const std::vector<ScadaFrame>& frames);
void write_csv(const std::filesystem::path& path, const ScadaFrame& frame);

/// "2018-04-01T10:30:00Z" (trailing Z optional on input) <-> epoch minutes.
std::int64_t parse_iso8601_min(const std::string& text);
std::string format_iso8601_min(std::int64_t epoch_min);

/// Shortest decimal form of a double that parses back to the same value.
std::string format_double(double v);

}  // namespace scadanb
