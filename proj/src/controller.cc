#include "cotrans/controller.h"

#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "cotrans/errors.h"

namespace cotrans {

CommandSignal CommandSignal::Zero(int dimension) {
  CommandSignal c;
  c.kind_ = Kind::kZero;
  c.dimension_ = dimension;
  c.value_ = Vec::Zero(dimension);
  return c;
}

CommandSignal CommandSignal::Constant(Vec value) {
  CommandSignal c;
  c.kind_ = Kind::kConstant;
  c.dimension_ = static_cast<int>(value.size());
  c.value_ = std::move(value);
  return c;
}

CommandSignal CommandSignal::Circular(int dimension, double amplitude, double period) {
  if (dimension < 2) throw HardInvalid("circular command needs dimension >= 2");
  if (!(period > 0.0)) throw HardInvalid("circular command period must be positive");
  CommandSignal c;
  c.kind_ = Kind::kCircular;
  c.dimension_ = dimension;
  c.amplitude_ = amplitude;
  c.period_ = period;
  c.value_ = Vec::Zero(dimension);
  return c;
}

CommandSignal CommandSignal::Scaled(double factor) const {
  CommandSignal c = *this;
  c.amplitude_ *= factor;
  c.value_ *= factor;
  return c;
}

CommandSignal::Sample CommandSignal::operator()(double t) const {
  Sample out{Vec::Zero(dimension_), Vec::Zero(dimension_), Vec::Zero(dimension_)};
  switch (kind_) {
    case Kind::kZero:
      break;
    case Kind::kConstant:
      out.velocity = value_;
      break;
    case Kind::kCircular: {
      const double w = 2.0 * std::numbers::pi / period_;
      const double c = std::cos(w * t);
      const double s = std::sin(w * t);
      out.velocity(0) = -amplitude_ * c;
      out.velocity(1) = -amplitude_ * s;
      out.acceleration(0) = amplitude_ * w * s;
      out.acceleration(1) = -amplitude_ * w * c;
      out.jerk(0) = amplitude_ * w * w * c;
      out.jerk(1) = amplitude_ * w * w * s;
      break;
    }
  }
  return out;
}

VirtualPositions virtual_positions(const ControllerGains& gains, const BodyGeometry& geom,
                                   const Vec& p_o, const Vec& v_o, const Vec& v_c,
                                   const Vec& cmd_accel) {
  const Eigen::MatrixXd& l = gains.dirs.matrix();
  const Vec vel_error = v_o - v_c;
  const QpProblem prob =
      assemble_qp(gains.dirs, geom.k_f, gains.eps, gains.k_v, vel_error, cmd_accel);

  VirtualPositions out;
  out.qp = solve_qp(prob);
  out.s_star = out.qp.s;
  const Vec u = gains.k_v * vel_error - cmd_accel;
  out.u_norm = u.norm();
  out.qp_residual = (geom.k_f * (l * out.s_star) - u).norm();

  const double reach = geom.contact_distance();
  out.p_star.resize(l.rows(), l.cols());
  for (Eigen::Index i = 0; i < l.cols(); ++i) {
    out.p_star.col(i) = p_o + l.col(i) * (reach - out.s_star(i));
    if (out.s_star(i) >= reach) out.saturated = true;
  }
  if (out.saturated) {
    spdlog::debug("virtual position saturated: max s* = {:.6g} >= D + D_o = {:.6g}",
                  out.s_star.maxCoeff(), reach);
  }
  return out;
}

Eigen::MatrixXd robot_velocity_commands(const ControllerGains& gains,
                                        const SystemState& state,
                                        const Eigen::MatrixXd& p_star) {
  if (p_star.rows() != state.robots.rows() || p_star.cols() != state.robots.cols()) {
    throw DimensionMismatch("virtual positions do not match robot positions");
  }
  Eigen::MatrixXd v = -gains.k_p * (state.robots - p_star);
  v.colwise() += state.v_o;
  return v;
}

ControlOutput control_step(const ControllerGains& gains, const BodyGeometry& geom,
                           const CommandSignal& command, const SystemState& state,
                           double t) {
  ControlOutput out;
  out.command = command(t);
  VirtualPositions vp = virtual_positions(gains, geom, state.p_o, state.v_o,
                                          out.command.velocity, out.command.acceleration);
  out.robot_velocities = robot_velocity_commands(gains, state, vp.p_star);
  out.p_star = std::move(vp.p_star);
  out.s_star = std::move(vp.s_star);
  out.qp_residual = vp.qp_residual;
  out.u_norm = vp.u_norm;
  out.saturated = vp.saturated;
  return out;
}

}  // namespace cotrans
