#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "coopgrid/core/scenario.h"

namespace coopgrid::report {

inline constexpr std::string_view kScenarioFormat = "coopgrid-scenario/1";

/// Strict JSON reader: unknown keys, wrong types, ragged series and
/// non-square shapes raise ParseError naming the line or field path; a
/// well-formed file that fails validate_scenario raises ValidationError.
/// A number in place of a per-period series is repeated over the horizon.
Scenario parse_scenario(std::string_view text, std::string_view source = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical JSON (series always expanded). parse_scenario(write) == s.
std::string write_scenario(const Scenario& s);

}  // namespace coopgrid::report
