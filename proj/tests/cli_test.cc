#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cotrans/commands.h"
#include "cotrans/errors.h"
#include "cotrans/output.h"
#include "cotrans/scenario_io.h"
#include "test_util.h"

namespace cotrans {
namespace {

namespace fs = std::filesystem;
using testing::scenario_path;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("cotrans_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) +
             "_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // Copy of a bundled scenario with a short horizon.
  fs::path short_scenario(const std::string& name, double t_end) {
    ScenarioConfig cfg = parse_scenario(scenario_path(name));
    cfg.t_end = t_end;
    const fs::path p = root_ / name;
    write_file(p, format_scenario(cfg));
    return p;
  }

  fs::path root_;
};

EstimateOptions quick_estimates() {
  EstimateOptions e;
  e.samples = 500;
  return e;
}

// Summary CSV whose first column is text.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Table read_table(const std::string& text) {
  Table t;
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  t.header = split(line);
  while (std::getline(ss, line)) {
    if (!line.empty()) t.rows.push_back(split(line));
  }
  return t;
}

int shell(const std::string& command) {
  const int status = std::system((command + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Output, TrajectoryCsvRoundTrip) {
  ScenarioConfig cfg = reference_scenario(1.0);
  cfg.t_end = 1.0;
  const TrajectoryLog log = run(cfg);
  const CsvTable t = parse_csv(trajectory_csv(log));
  ASSERT_EQ(t.rows.size(), log.size());
  ASSERT_EQ(t.header.size(), 1u + 4u + 3u * 7u);
  EXPECT_EQ(t.header[0], "t");
  EXPECT_EQ(t.header[1], "p_o_x");
  EXPECT_EQ(t.header[3], "v_o_x");
  EXPECT_EQ(t.header[5], "p_1_x");
  EXPECT_EQ(t.header[7], "p_star_1_x");
  EXPECT_EQ(t.header[9], "s_star_1");
  EXPECT_EQ(t.header[10], "force_1_x");
  for (std::size_t k = 0; k < log.size(); ++k) {
    const std::vector<double>& r = t.rows[k];
    ASSERT_EQ(r[0], log.times[k]);
    ASSERT_EQ(r[1], log.states[k].p_o(0));
    ASSERT_EQ(r[4], log.states[k].v_o(1));
    for (int i = 0; i < 3; ++i) {
      const std::size_t base = 5 + 7 * static_cast<std::size_t>(i);
      ASSERT_EQ(r[base], log.states[k].robots(0, i));
      ASSERT_EQ(r[base + 1], log.states[k].robots(1, i));
      ASSERT_EQ(r[base + 2], log.p_star[k](0, i));
      ASSERT_EQ(r[base + 3], log.p_star[k](1, i));
      ASSERT_EQ(r[base + 4], log.s_star[k](i));
      ASSERT_EQ(r[base + 5], log.contact_forces[k](0, i));
      ASSERT_EQ(r[base + 6], log.contact_forces[k](1, i));
    }
  }
}

TEST(Output, ErrorsAndVelocitiesCsv) {
  ScenarioConfig cfg = reference_scenario(1.0);
  cfg.t_end = 0.5;
  const TrajectoryLog log = run(cfg);
  const CsvTable e = parse_csv(errors_csv(log));
  EXPECT_EQ(e.header, (std::vector<std::string>{"t", "vel_error_norm", "pos_error_norm_max",
                                                "qp_residual", "saturated"}));
  for (std::size_t k = 0; k < log.size(); ++k) {
    ASSERT_EQ(e.rows[k][1], log.vel_error_norm[k]);
    ASSERT_EQ(e.rows[k][2], log.pos_error_norm_max[k]);
    ASSERT_EQ(e.rows[k][3], log.qp_residual[k]);
    ASSERT_EQ(e.rows[k][4], log.saturation_flags[k] ? 1.0 : 0.0);
  }
  const CsvTable v = parse_csv(velocities_csv(log));
  ASSERT_EQ(v.header.size(), 1u + 2u + 2u + 6u);
  EXPECT_EQ(v.header[3], "v_c_x");
  EXPECT_EQ(v.rows[0][3], -1.0);
  EXPECT_EQ(v.rows[3][5], log.robot_velocities[3](0, 0));
}

TEST(Output, SvgDocuments) {
  ScenarioConfig cfg = reference_scenario(1.0);
  cfg.t_end = 0.5;
  const TrajectoryLog log = run(cfg);
  for (const std::string& svg : {trajectory_svg(log, cfg), errors_svg(log),
                                 object_velocity_svg(log), robot_velocities_svg(log)}) {
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);
  }
  EXPECT_NE(trajectory_svg(log, cfg).find("<circle"), std::string::npos);
}

TEST(Output, CsvParseErrors) {
  EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), ParseError);
  EXPECT_THROW(parse_csv("a,b\n1,x\n"), ParseError);
}

TEST_F(TempDir, RunWritesManifest) {
  const RunReport r =
      run_command(short_scenario("paperset1.scenario", 2.0), root_ / "out", {}, quick_estimates());
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_TRUE(r.completed);
  std::vector<std::string> names;
  for (const fs::path& p : r.manifest) {
    EXPECT_TRUE(fs::exists(p)) << p;
    names.push_back(p.filename().string());
  }
  for (const char* expected : {"trajectory.csv", "errors.csv", "velocities.csv", "trajectory.svg",
                               "errors.svg", "object_velocity.svg", "robot_velocities.svg",
                               "report.json"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), expected), names.end()) << expected;
  }
  const nlohmann::json j = nlohmann::json::parse(read_file(root_ / "out" / "report.json"));
  EXPECT_EQ(j["certificate"]["label"], "empirical");
  EXPECT_EQ(j["exit_code"].get<int>(), 0);
}

TEST_F(TempDir, RerunIsByteIdentical) {
  const fs::path scenario = short_scenario("paperset2.scenario", 3.0);
  run_command(scenario, root_ / "a", {}, quick_estimates());
  run_command(scenario, root_ / "b", {}, quick_estimates());
  for (const char* f : {"trajectory.csv", "errors.csv", "velocities.csv"}) {
    EXPECT_EQ(read_file(root_ / "a" / f), read_file(root_ / "b" / f)) << f;
  }
}

TEST_F(TempDir, OverridesTakePrecedence) {
  RunOverrides o;
  o.dt = 5e-4;
  o.t_end = 0.5;
  o.seed = 9;
  const RunReport r =
      run_command(scenario_path("paperset1.scenario"), root_ / "out", o, quick_estimates());
  EXPECT_EQ(r.config.dt, 5e-4);
  EXPECT_EQ(r.config.t_end, 0.5);
  EXPECT_EQ(r.config.seed, 9u);
  EXPECT_EQ(parse_csv(read_file(root_ / "out" / "errors.csv")).rows.size(), 1001u);
}

TEST_F(TempDir, ParameterSetTwoTracksWorse) {
  const RunReport one = run_command(scenario_path("paperset1.scenario"), root_ / "one", {},
                                    quick_estimates());
  const RunReport two = run_command(scenario_path("paperset2.scenario"), root_ / "two", {},
                                    quick_estimates());
  EXPECT_GT(two.metrics->vel_error.tail_mean, one.metrics->vel_error.tail_mean);
}

TEST_F(TempDir, SweepSummary) {
  const fs::path scenario = short_scenario("paperset1.scenario", 2.0);
  const std::vector<RunReport> reports =
      sweep_command(scenario, "k_p", {0.1, 1.0}, root_ / "sweep", quick_estimates());
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].config.gains.k_p, 0.1);
  EXPECT_EQ(reports[1].config.gains.k_p, 1.0);
  EXPECT_TRUE(fs::exists(root_ / "sweep" / "k_p_0" / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(root_ / "sweep" / "k_p_1" / "trajectory.csv"));
  const Table t = read_table(read_file(root_ / "sweep" / "sweep_summary.csv"));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.header[0], "parameter");
  EXPECT_EQ(t.rows[0][0], "k_p");
  EXPECT_EQ(std::stod(t.rows[0][1]), 0.1);
  EXPECT_EQ(std::stod(t.rows[1][1]), 1.0);
  // Final object state equals the last trajectory row.
  const CsvTable traj = parse_csv(read_file(root_ / "sweep" / "k_p_1" / "trajectory.csv"));
  const auto col = std::find(t.header.begin(), t.header.end(), "final_p_o_x") - t.header.begin();
  EXPECT_EQ(std::stod(t.rows[1][static_cast<std::size_t>(col)]), traj.rows.back()[1]);
}

TEST_F(TempDir, SweepContinuesPastFailures) {
  const fs::path scenario = short_scenario("paperset1.scenario", 0.5);
  const std::vector<RunReport> reports =
      sweep_command(scenario, "dt", {1e-3, 1.0, 2e-3}, root_ / "sweep", quick_estimates());
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].exit_code, kExitOk);
  EXPECT_EQ(reports[1].exit_code, kExitConfig);
  EXPECT_EQ(reports[2].exit_code, kExitOk);
}

TEST_F(TempDir, SweepRejectsBadRequests) {
  const fs::path scenario = scenario_path("paperset1.scenario");
  EXPECT_THROW(sweep_command(scenario, "k_p", {}, root_ / "s"), SchemaError);
  EXPECT_THROW(sweep_command(scenario, "k_f", {1.0}, root_ / "s"), SchemaError);
}

TEST(Check, CertifiesWithoutIntegrating) {
  const RunReport r = check_command(scenario_path("paperset1.scenario"), quick_estimates());
  EXPECT_FALSE(r.metrics.has_value());
  ASSERT_TRUE(r.certificate.has_value());
  EXPECT_TRUE(r.certificate->empirical);
  EXPECT_GT(r.estimates.L_f, 0.0);
  EXPECT_GT(r.estimates.L_phi, 0.0);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(SchemaError("k", "x")), kExitConfig);
  EXPECT_EQ(exit_code_for(ParseError(1, "x")), kExitConfig);
  EXPECT_EQ(exit_code_for(HardInvalid("x")), kExitConfig);
  EXPECT_EQ(exit_code_for(IoError("x")), kExitIo);
  EXPECT_EQ(exit_code_for(CenterCoincidence(0, 1.0, "x")), kExitRuntime);
  EXPECT_EQ(exit_code_for(MaxIterations("x")), kExitRuntime);
}

TEST_F(TempDir, BinaryExitCodes) {
  const std::string cli = COTRANS_CLI_PATH;
  const fs::path ok = short_scenario("paperset1.scenario", 0.2);
  EXPECT_EQ(shell(cli + " run " + ok.string() + " -o " + (root_ / "out").string()), 0);
  EXPECT_TRUE(fs::exists(root_ / "out" / "trajectory.csv"));
  EXPECT_EQ(shell(cli + " check " + ok.string()), 0);

  EXPECT_EQ(shell(cli + " run " + (root_ / "missing.scenario").string()), kExitIo);

  const fs::path bad = root_ / "bad.scenario";
  write_file(bad, "[geometry]\nn = 2\nbogus = 1\n");
  EXPECT_EQ(shell(cli + " run " + bad.string()), kExitConfig);

  ScenarioConfig invalid = parse_scenario(ok);
  invalid.gains.dirs = DirectionSet::FromVectors(
      {testing::vec2(1, 0), testing::vec2(0, 1), testing::vec2(0, 1)});
  const fs::path degenerate = root_ / "degenerate.scenario";
  write_file(degenerate, format_scenario(invalid));
  EXPECT_EQ(shell(cli + " run " + degenerate.string() + " -o " + (root_ / "deg").string()), 0);

  ScenarioConfig coincide = parse_scenario(ok);
  coincide.initial_state.robots.col(0) = coincide.initial_state.p_o;
  const fs::path c = root_ / "coincide.scenario";
  write_file(c, format_scenario(coincide));
  EXPECT_EQ(shell(cli + " run " + c.string() + " -o " + (root_ / "co").string()), kExitConfig);

  EXPECT_EQ(shell(cli + " sweep " + ok.string() + " --param k_p --values 0.5,1 -o " +
                  (root_ / "sw").string()),
            0);
  EXPECT_EQ(shell(cli + " run " + ok.string() + " --dt -1"), kExitConfig);
}

}  // namespace
}  // namespace cotrans
