#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cotrans/controller.h"
#include "cotrans/dynamics.h"

namespace cotrans {

/// How robot velocity commands are applied across an integration step.
enum class ControlHold {
  /// Evaluated once at the start of the step and held constant.
  kZeroOrderHold,
  /// Re-evaluated at every Runge-Kutta stage (continuous closed loop).
  kPerStage,
};

struct ScenarioConfig {
  std::string name;
  int n = 2;
  int N = 3;
  BodyGeometry geom;
  ControllerGains gains;
  CommandSignal command = CommandSignal::Zero(2);
  SystemState initial_state;
  double dt = 1e-3;
  double t_end = 60.0;
  std::uint64_t seed = 0;
  ControlHold hold = ControlHold::kPerStage;

  /// Number of logged samples, floor(t_end / dt) + 1.
  int sample_count() const;
};

/// Reference example: n = 2, N = 3, circular command, parameter
/// set 1 (k_p = 1.0) or set 2 (k_p = 0.1).
ScenarioConfig reference_scenario(double k_p = 1.0);

struct ValidationReport {
  bool positively_spanning = false;
  bool nwise_independent = false;
  /// |p_i(0) - p_o(0) - l_i (D + D_o)| per robot.
  std::vector<double> initial_deviation;
  double initial_speed = 0.0;
  std::vector<std::string> warnings;
};

/// Throws HardInvalid for unusable scenarios; everything the stability result
/// merely assumes is reported as a warning.
ValidationReport validate_scenario(const ScenarioConfig& cfg);

/// Robot velocities as a function of (state, t).
using VelocityPolicy = std::function<Eigen::MatrixXd(const SystemState&, double)>;

/// Classical RK4 step of the open-loop equations of motion with robot
/// velocities supplied by `policy` at each stage. Throws CenterCoincidence
/// stamped with the stage time.
SystemState rk4_step(const BodyGeometry& geom, const SystemState& state, double t, double h,
                     const VelocityPolicy& policy);

/// One closed-loop RK4 step of size cfg.dt from (state, t), with the control
/// applied according to cfg.hold.
SystemState step(const ScenarioConfig& cfg, const SystemState& state, double t);

struct TrajectoryLog {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<Vec> s_star;
  std::vector<Eigen::MatrixXd> p_star;
  std::vector<Eigen::MatrixXd> robot_velocities;
  std::vector<Vec> command_velocity;
  std::vector<double> vel_error_norm;
  std::vector<double> pos_error_norm_max;
  std::vector<double> qp_residual;
  std::vector<double> u_norm;
  std::vector<Eigen::MatrixXd> contact_forces;
  std::vector<bool> saturation_flags;

  bool completed = true;
  std::string failure;
  double failure_time = 0.0;

  std::size_t size() const { return times.size(); }
};

/// Integrates from 0 to t_end. On CenterCoincidence the log is truncated at
/// the last good sample and `completed` is false.
TrajectoryLog run(const ScenarioConfig& cfg);

struct SeriesStats {
  double max = 0.0;
  double mean = 0.0;
  double tail_mean = 0.0;  // last 25% of the logged horizon
};

struct CircleFit {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
  double rms_residual = 0.0;
  double window_start = 0.0;
  int points = 0;
};

struct MetricsSummary {
  SeriesStats vel_error;
  SeriesStats pos_error;
  std::optional<CircleFit> circle;
  int saturation_count = 0;
  /// max_t qp_residual / |u| over samples with |u| > 1e-6; 0 if none.
  double delta_hat = 0.0;
};

/// Least-squares circle through planar points (algebraic fit refined by
/// Gauss-Newton on geometric distance).
CircleFit fit_circle(const std::vector<Eigen::Vector2d>& points);

/// For circular commands the object path over the final command period is
/// fitted with a circle.
MetricsSummary metrics(const TrajectoryLog& log, const ScenarioConfig& cfg);

}  // namespace cotrans
