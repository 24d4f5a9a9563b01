#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotrans/analysis.h"
#include "cotrans/simulation.h"

namespace cotrans {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitRuntime = 2,
  kExitIo = 3,
};

struct RunOverrides {
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(ScenarioConfig& cfg, const RunOverrides& overrides);

struct RunReport {
  std::string scenario;
  ScenarioConfig config;
  ValidationReport validation;
  std::optional<MetricsSummary> metrics;
  LipschitzEstimates estimates;
  std::optional<GainCertificate> certificate;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> manifest;
  bool completed = true;
  std::string failure;
  int exit_code = kExitOk;
};

nlohmann::json to_json(const RunReport& report);

/// Maps an in-flight exception to its exit code: configuration problems 1,
/// I/O 3, everything else 2.
int exit_code_for(const std::exception& e);

/// validate -> run -> metrics -> certify; writes trajectory.csv, errors.csv,
/// velocities.csv, four SVG plots and report.json into out_dir. exit_code is
/// kExitRuntime when the integration stopped early.
RunReport run_scenario(ScenarioConfig cfg, const std::filesystem::path& out_dir,
                       const EstimateOptions& estimates = {});

RunReport run_command(const std::filesystem::path& scenario,
                      const std::filesystem::path& out_dir, const RunOverrides& overrides = {},
                      const EstimateOptions& estimates = {});

/// Parameters accepted by sweep: k_p, k_v, eps, dt.
void set_parameter(ScenarioConfig& cfg, const std::string& parameter, double value);

/// One run per value in out_dir/<parameter>_<index>/, plus
/// out_dir/sweep_summary.csv. Per-run failures are recorded and the sweep
/// continues. Throws SchemaError for an empty value list or unknown parameter.
std::vector<RunReport> sweep_command(const std::filesystem::path& scenario,
                                     const std::string& parameter,
                                     const std::vector<double>& values,
                                     const std::filesystem::path& out_dir,
                                     const EstimateOptions& estimates = {});

/// Validation and certification only, no integration. delta comes from
/// sampled QP inputs instead of a trajectory.
RunReport check_command(const std::filesystem::path& scenario,
                        const EstimateOptions& estimates = {});

}  // namespace cotrans
