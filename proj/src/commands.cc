#include "cotrans/commands.h"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cotrans/errors.h"
#include "cotrans/output.h"
#include "cotrans/scenario_io.h"

namespace cotrans {

namespace fs = std::filesystem;

void apply_overrides(ScenarioConfig& cfg, const RunOverrides& overrides) {
  if (overrides.dt) {
    if (!(*overrides.dt > 0.0)) throw SchemaError("dt", "--dt must be positive");
    cfg.dt = *overrides.dt;
  }
  if (overrides.t_end) {
    if (!(*overrides.t_end > 0.0)) throw SchemaError("t_end", "--t-end must be positive");
    cfg.t_end = *overrides.t_end;
  }
  if (overrides.seed) cfg.seed = *overrides.seed;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const HardInvalid*>(&e) || dynamic_cast<const DimensionMismatch*>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  return kExitRuntime;
}

namespace {

nlohmann::json stats_json(const SeriesStats& s) {
  return {{"max", s.max}, {"mean", s.mean}, {"tail_mean", s.tail_mean}};
}

void certify(RunReport& report, double delta_hat) {
  try {
    report.certificate = certify_scenario(report.config, delta_hat, report.estimates.L_f,
                                          report.estimates.L_phi);
  } catch (const HardInvalid& e) {
    report.warnings.push_back(fmt::format("certificate unavailable: {}", e.what()));
  }
}

}  // namespace

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json j;
  j["scenario"] = report.scenario;
  j["config"] = format_scenario(report.config);
  j["validation"] = {
      {"positively_spanning", report.validation.positively_spanning},
      {"nwise_independent", report.validation.nwise_independent},
      {"initial_deviation", report.validation.initial_deviation},
      {"initial_speed", report.validation.initial_speed},
  };
  if (report.metrics) {
    const MetricsSummary& m = *report.metrics;
    j["metrics"] = {{"vel_error_norm", stats_json(m.vel_error)},
                    {"pos_error_norm_max", stats_json(m.pos_error)},
                    {"saturation_count", m.saturation_count},
                    {"delta_hat", m.delta_hat}};
    if (m.circle) {
      j["metrics"]["circle_fit"] = {{"center", {m.circle->center.x(), m.circle->center.y()}},
                                    {"radius", m.circle->radius},
                                    {"rms_residual", m.circle->rms_residual},
                                    {"window_start", m.circle->window_start},
                                    {"points", m.circle->points}};
    }
  }
  j["estimates"] = {{"L_f", report.estimates.L_f},
                    {"L_phi", report.estimates.L_phi},
                    {"delta", report.estimates.delta},
                    {"label", "empirical"}};
  if (report.certificate) {
    const GainCertificate& c = *report.certificate;
    nlohmann::json lhs = c.small_gain_feasible ? nlohmann::json(c.small_gain_lhs) : nlohmann::json();
    j["certificate"] = {
        {"label", "empirical"},
        {"A", {{c.A(0, 0), c.A(0, 1)}, {c.A(1, 0), c.A(1, 1)}}},
        {"eigenvalues",
         {{c.eigenvalues[0].real(), c.eigenvalues[0].imag()},
          {c.eigenvalues[1].real(), c.eigenvalues[1].imag()}}},
        {"hurwitz", c.hurwitz},
        {"small_gain_feasible", c.small_gain_feasible},
        {"small_gain_lhs", lhs},
        {"small_gain_ok", c.small_gain_ok},
        {"kp_threshold", c.kp_threshold},
        {"kp_condition", c.kp_condition},
    };
  }
  j["warnings"] = report.warnings;
  std::vector<std::string> files;
  for (const fs::path& p : report.manifest) files.push_back(p.filename().string());
  j["manifest"] = files;
  j["completed"] = report.completed;
  if (!report.completed) j["failure"] = report.failure;
  j["exit_code"] = report.exit_code;
  return j;
}

RunReport run_scenario(ScenarioConfig cfg, const fs::path& out_dir,
                       const EstimateOptions& estimates) {
  RunReport report;
  report.scenario = cfg.name;
  report.validation = validate_scenario(cfg);
  report.config = cfg;
  report.warnings = report.validation.warnings;
  for (const std::string& w : report.warnings) spdlog::warn("{}", w);

  spdlog::info("running '{}': {} steps of dt = {}", cfg.name, cfg.sample_count() - 1, cfg.dt);
  const TrajectoryLog log = run(cfg);
  report.completed = log.completed;
  report.failure = log.failure;
  report.metrics = metrics(log, cfg);
  if (report.metrics->saturation_count > 0) {
    report.warnings.push_back(fmt::format("{} samples with saturated virtual positions",
                                          report.metrics->saturation_count));
  }

  report.estimates = estimate_constants(cfg, estimates);
  // delta from the trajectory when there is one to measure.
  report.estimates.delta =
      report.metrics->delta_hat > 0.0 ? report.metrics->delta_hat : report.estimates.delta;
  certify(report, report.estimates.delta);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));
  const std::pair<const char*, std::string> files[] = {
      {"trajectory.csv", trajectory_csv(log)},
      {"errors.csv", errors_csv(log)},
      {"velocities.csv", velocities_csv(log)},
      {"trajectory.svg", trajectory_svg(log, cfg)},
      {"errors.svg", errors_svg(log)},
      {"object_velocity.svg", object_velocity_svg(log)},
      {"robot_velocities.svg", robot_velocities_svg(log)},
  };
  for (const auto& [name, contents] : files) {
    write_file(out_dir / name, contents);
    report.manifest.push_back(out_dir / name);
  }
  report.exit_code = log.completed ? kExitOk : kExitRuntime;
  report.manifest.push_back(out_dir / "report.json");
  write_file(out_dir / "report.json", to_json(report).dump(2) + "\n");
  return report;
}

RunReport run_command(const fs::path& scenario, const fs::path& out_dir,
                      const RunOverrides& overrides, const EstimateOptions& estimates) {
  ScenarioConfig cfg = parse_scenario(scenario);
  apply_overrides(cfg, overrides);
  return run_scenario(std::move(cfg), out_dir, estimates);
}

void set_parameter(ScenarioConfig& cfg, const std::string& parameter, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw SchemaError(parameter, fmt::format("sweep value {} for '{}' must be positive", value,
                                             parameter));
  }
  if (parameter == "k_p") {
    cfg.gains.k_p = value;
  } else if (parameter == "k_v") {
    cfg.gains.k_v = value;
  } else if (parameter == "eps") {
    cfg.gains.eps = value;
  } else if (parameter == "dt") {
    cfg.dt = value;
  } else {
    throw SchemaError(parameter,
                      fmt::format("cannot sweep '{}'; expected k_p, k_v, eps or dt", parameter));
  }
}

std::vector<RunReport> sweep_command(const fs::path& scenario, const std::string& parameter,
                                     const std::vector<double>& values, const fs::path& out_dir,
                                     const EstimateOptions& estimates) {
  if (values.empty()) throw SchemaError(parameter, "sweep needs at least one value");
  const ScenarioConfig base = parse_scenario(scenario);
  {
    ScenarioConfig probe = base;
    set_parameter(probe, parameter, values.front());
  }

  std::vector<RunReport> reports;
  std::string summary =
      "parameter,value,exit_code,completed,vel_error_max,vel_error_tail_mean,"
      "pos_error_tail_mean,circle_radius,circle_rms,saturation_count,delta_hat";
  for (int j = 0; j < base.n; ++j) summary += ",final_p_o_" + axis_name(j);
  for (int j = 0; j < base.n; ++j) summary += ",final_v_o_" + axis_name(j);
  summary += ",small_gain_ok\n";

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < values.size(); ++k) {
    ScenarioConfig cfg = base;
    RunReport report;
    const fs::path dir = out_dir / fmt::format("{}_{}", parameter, k);
    try {
      set_parameter(cfg, parameter, values[k]);
      report = run_scenario(cfg, dir, estimates);
    } catch (const std::exception& e) {
      spdlog::error("sweep {} = {}: {}", parameter, values[k], e.what());
      report.scenario = base.name;
      report.config = cfg;
      report.completed = false;
      report.failure = e.what();
      report.exit_code = exit_code_for(e);
    }
    fmt::format_to(std::back_inserter(summary), "{},{:.17g},{},{}", parameter, values[k],
                   report.exit_code, report.completed ? 1 : 0);
    const MetricsSummary m = report.metrics.value_or(MetricsSummary{});
    const bool has = report.metrics.has_value();
    fmt::format_to(std::back_inserter(summary), ",{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g}",
                   has ? m.vel_error.max : nan, has ? m.vel_error.tail_mean : nan,
                   has ? m.pos_error.tail_mean : nan, m.circle ? m.circle->radius : nan,
                   m.circle ? m.circle->rms_residual : nan, m.saturation_count,
                   has ? m.delta_hat : nan);
    // Final state comes from the written trajectory so it matches the files.
    std::vector<double> final_state(static_cast<std::size_t>(2 * base.n), nan);
    if (has && fs::exists(dir / "trajectory.csv")) {
      const CsvTable t = parse_csv(read_file(dir / "trajectory.csv"));
      if (!t.rows.empty()) {
        for (int j = 0; j < 2 * base.n; ++j) {
          final_state[static_cast<std::size_t>(j)] = t.rows.back()[static_cast<std::size_t>(1 + j)];
        }
      }
    }
    for (double v : final_state) fmt::format_to(std::back_inserter(summary), ",{:.17g}", v);
    summary += fmt::format(",{}\n", report.certificate && report.certificate->small_gain_ok ? 1 : 0);
    reports.push_back(std::move(report));
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));
  write_file(out_dir / "sweep_summary.csv", summary);
  return reports;
}

RunReport check_command(const fs::path& scenario, const EstimateOptions& estimates) {
  RunReport report;
  report.config = parse_scenario(scenario);
  report.scenario = report.config.name;
  report.validation = validate_scenario(report.config);
  report.warnings = report.validation.warnings;
  report.estimates = estimate_constants(report.config, estimates);
  certify(report, report.estimates.delta);
  return report;
}

}  // namespace cotrans
