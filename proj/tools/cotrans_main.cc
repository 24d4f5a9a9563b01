// cotrans: simulate and certify QP-based cooperative object transport.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cotrans/commands.h"

namespace {

void configure_logging() {
  const char* env = std::getenv("COTRANS_LOG");
  spdlog::set_level(spdlog::level::warn);
  if (!env) return;
  const std::string level = env;
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "warn") {
    spdlog::set_level(spdlog::level::warn);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::warn("ignoring COTRANS_LOG='{}'; expected error, warn, info or debug", level);
  }
}

void print_summary(const cotrans::RunReport& r) {
  std::cout << fmt::format("scenario: {}\n", r.scenario);
  if (r.metrics) {
    std::cout << fmt::format("  |v_o - v_c|         max {:.6g}  tail-mean {:.6g}\n",
                             r.metrics->vel_error.max, r.metrics->vel_error.tail_mean);
    std::cout << fmt::format("  max_i |p_i - p*_i|  max {:.6g}  tail-mean {:.6g}\n",
                             r.metrics->pos_error.max, r.metrics->pos_error.tail_mean);
    if (r.metrics->circle) {
      std::cout << fmt::format("  object path circle  radius {:.6g}  rms residual {:.6g}\n",
                               r.metrics->circle->radius, r.metrics->circle->rms_residual);
    }
    std::cout << fmt::format("  saturated samples   {}\n", r.metrics->saturation_count);
  }
  std::cout << fmt::format("  empirical L_f {:.6g}  L_phi {:.6g}  delta {:.6g}\n",
                           r.estimates.L_f, r.estimates.L_phi, r.estimates.delta);
  if (r.certificate) {
    const auto& c = *r.certificate;
    std::cout << fmt::format(
        "  empirical certificate: small-gain {} (lhs {}), Hurwitz {}, k_p threshold {:.6g}\n",
        c.small_gain_ok ? "ok" : "violated",
        c.small_gain_feasible ? fmt::format("{:.6g}", c.small_gain_lhs) : "undefined",
        c.hurwitz ? "yes" : "no", c.kp_threshold);
  }
  for (const auto& w : r.warnings) std::cout << "  warning: " << w << "\n";
  if (!r.completed) std::cout << "  stopped early: " << r.failure << "\n";
  for (const auto& p : r.manifest) std::cout << "  wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Cooperative object transport: simulation and small-gain certification"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir = "out";
  cotrans::RunOverrides overrides;
  double dt = 0.0;
  double t_end = 0.0;
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "Simulate a scenario and write CSV/SVG output");
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_option("-o,--out", out_dir, "Output directory");
  CLI::Option* dt_opt = run->add_option("--dt", dt, "Override integration step [s]");
  CLI::Option* t_end_opt = run->add_option("--t-end", t_end, "Override horizon [s]");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Override estimator seed");

  std::string parameter;
  std::vector<double> values;
  CLI::App* sweep = app.add_subcommand("sweep", "Run one simulation per parameter value");
  sweep->add_option("scenario", scenario, "Scenario file")->required();
  sweep->add_option("--param", parameter, "k_p, k_v, eps or dt")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();
  sweep->add_option("-o,--out", out_dir, "Output directory");

  CLI::App* check = app.add_subcommand("check", "Validate and certify without integrating");
  check->add_option("scenario", scenario, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cotrans::kExitConfig;
  }

  try {
    if (*run) {
      if (*dt_opt) overrides.dt = dt;
      if (*t_end_opt) overrides.t_end = t_end;
      if (*seed_opt) overrides.seed = seed;
      const cotrans::RunReport report = cotrans::run_command(scenario, out_dir, overrides);
      print_summary(report);
      return report.exit_code;
    }
    if (*sweep) {
      const auto reports = cotrans::sweep_command(scenario, parameter, values, out_dir);
      int code = cotrans::kExitOk;
      for (const auto& r : reports) {
        print_summary(r);
        if (r.exit_code != cotrans::kExitOk) code = r.exit_code;
      }
      std::cout << "wrote " << (std::filesystem::path(out_dir) / "sweep_summary.csv").string()
                << "\n";
      return code;
    }
    if (*check) {
      const cotrans::RunReport report = cotrans::check_command(scenario);
      std::cout << cotrans::to_json(report).dump(2) << "\n";
      return cotrans::kExitOk;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    std::cerr << "error: " << e.what() << "\n";
    return cotrans::exit_code_for(e);
  }
  return cotrans::kExitOk;
}
