#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cotrans/dynamics.h"
#include "cotrans/geometry.h"
#include "cotrans/qp.h"

namespace cotrans {

/// Exogenous velocity command v_c(t) with analytic derivatives.
///   zero:      v_c = 0
///   constant:  v_c = value
///   circular:  v_c = -A [cos(wt), sin(wt), 0...], w = 2 pi / period
class CommandSignal {
 public:
  enum class Kind { kZero, kConstant, kCircular };

  struct Sample {
    Vec velocity;
    Vec acceleration;
    Vec jerk;
  };

  static CommandSignal Zero(int dimension);
  static CommandSignal Constant(Vec value);
  static CommandSignal Circular(int dimension, double amplitude, double period);

  Kind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  double amplitude() const { return amplitude_; }
  double period() const { return period_; }
  const Vec& value() const { return value_; }

  /// Multiplies the signal (and its derivatives) by `factor`.
  CommandSignal Scaled(double factor) const;

  Sample operator()(double t) const;

 private:
  Kind kind_ = Kind::kZero;
  int dimension_ = 2;
  double amplitude_ = 0.0;
  double period_ = 0.0;
  Vec value_;
};

struct ControllerGains {
  double k_v = 0.5;
  double k_p = 1.0;
  double eps = 0.01;
  DirectionSet dirs;
};

struct VirtualPositions {
  Eigen::MatrixXd p_star;  // n x N
  Vec s_star;
  QpSolution qp;
  /// |k_f L s* - u| with u = k_v (v_o - v_c) - cmd_accel.
  double qp_residual = 0.0;
  double u_norm = 0.0;
  /// Some s*_i >= D + D_o; the achieved force then differs from k_f L s*.
  bool saturated = false;
};

struct ControlOutput {
  Eigen::MatrixXd robot_velocities;  // n x N
  Eigen::MatrixXd p_star;
  Vec s_star;
  double qp_residual = 0.0;
  double u_norm = 0.0;
  bool saturated = false;
  CommandSignal::Sample command;
};

/// Solves the force-allocation QP and places each robot's virtual position at
/// p_o + l_i (D + D_o - s*_i).
VirtualPositions virtual_positions(const ControllerGains& gains, const BodyGeometry& geom,
                                   const Vec& p_o, const Vec& v_o, const Vec& v_c,
                                   const Vec& cmd_accel);

/// v_i = -k_p (p_i - p*_i) + v_o
Eigen::MatrixXd robot_velocity_commands(const ControllerGains& gains,
                                        const SystemState& state,
                                        const Eigen::MatrixXd& p_star);

ControlOutput control_step(const ControllerGains& gains, const BodyGeometry& geom,
                           const CommandSignal& command, const SystemState& state,
                           double t);

}  // namespace cotrans
