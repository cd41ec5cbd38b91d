#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spinprec/analysis.hpp"

namespace spinprec::io {

inline constexpr std::string_view tool_name = "spinprec";
inline constexpr std::string_view tool_version = "0.1.0";

/// Parses the JSON run configuration. Required keys: wavelength_m,
/// peak_field_V_per_m, ellipticity_rad, ramp_cycles, total_cycles, theory.
/// Errors are ConfigError with "line L: ..." prefixes where a location exists.
analysis::RunSpec parse_config(std::string_view text);
analysis::RunSpec load_config(const std::string& path);

/// Canonical JSON form of a run spec; parse_config(config_json(s)) == s.
std::string config_json(const analysis::RunSpec& spec, int indent = 2);

/// Deterministic manifest (config snapshot, solver selection, tool version).
std::string manifest_json(const analysis::RunSpec& spec, int indent = -1);

/// Time series CSV: a "# manifest" comment line, the header row, one row per
/// snapshot. Fixed 17-significant-digit formatting.
std::string series_csv(const analysis::RunResult& run);
/// Sidecar JSON for a run: manifest, precession result or extraction error,
/// solver statistics, timing.
std::string run_json(const analysis::RunResult& run);

enum class SweepAxis { field, ellipticity };
SweepAxis parse_axis(std::string_view name);
std::string_view to_string(SweepAxis a);

std::string sweep_csv(const analysis::RunSpec& spec, SweepAxis axis, const analysis::SweepOutcome& sweep);
std::string sweep_json(const analysis::RunSpec& spec, SweepAxis axis, const analysis::SweepOutcome& sweep);

std::string bounds_json(double wavelength, double n_cycles);
std::string validation_json(const analysis::RunSpec& spec);

/// Writes `content` to `path`; throws IoError.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace spinprec::io
