#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cotrans/simulation.h"

namespace cotrans {

/// "x", "y", "z", then "c3", "c4", ...
std::string axis_name(int k);

/// t, p_o_*, v_o_*, then per robot i (1-based): p_i_*, p_star_i_*, s_star_i,
/// force_i_*.
std::string trajectory_csv(const TrajectoryLog& log);

/// t, vel_error_norm, pos_error_norm_max, qp_residual, saturated
std::string errors_csv(const TrajectoryLog& log);

/// t, v_o_*, v_c_*, then v_i_* per robot.
std::string velocities_csv(const TrajectoryLog& log);

/// Object and robot paths with body outlines at sampled instants.
std::string trajectory_svg(const TrajectoryLog& log, const ScenarioConfig& cfg);
/// max_i |p_i - p*_i| and |v_o - v_c| against time.
std::string errors_svg(const TrajectoryLog& log);
/// Object velocity components against the command.
std::string object_velocity_svg(const TrajectoryLog& log);
/// Robot velocity components.
std::string robot_velocities_svg(const TrajectoryLog& log);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Parses a numeric CSV with a header row. Throws ParseError.
CsvTable parse_csv(const std::string& text);

/// Throws IoError.
void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace cotrans
