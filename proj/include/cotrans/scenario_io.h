#pragma once

#include <filesystem>
#include <string>

#include "cotrans/simulation.h"

namespace cotrans {

/// Scenario files are sectioned key/value text:
///
///   # comment
///   [geometry]     n, N, robot_radius, object_radius, k_f
///   [gains]        k_v, k_p, eps (0.01), directions
///   [command]      type = zero | constant | circular,
///                  value = [..] (constant), amplitude (1), period (circular)
///   [initial]      p_o, v_o (zeros), robots = [[..], ..]
///   [integration]  dt (1e-3), t_end (60), seed (0), hold = stage (default) | zoh
///
/// `directions` is either a list of vectors or `evenly_spaced(N)`. Vectors
/// use JSON array syntax. Defaults in parentheses.
///
/// Throws ParseError (with line) for malformed text and SchemaError (naming
/// the key) for unknown, missing, duplicated, or invalid keys.
ScenarioConfig parse_scenario_text(const std::string& text, const std::string& name = "");

/// Throws IoError if the file cannot be read.
ScenarioConfig parse_scenario(const std::filesystem::path& path);

/// Inverse of parse_scenario_text, full precision.
std::string format_scenario(const ScenarioConfig& cfg);

}  // namespace cotrans
