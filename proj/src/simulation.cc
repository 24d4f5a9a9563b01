#include "cotrans/simulation.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cotrans/errors.h"

namespace cotrans {

int ScenarioConfig::sample_count() const {
  return static_cast<int>(std::floor(t_end / dt + 1e-9)) + 1;
}

ScenarioConfig reference_scenario(double k_p) {
  ScenarioConfig cfg;
  cfg.name = k_p == 1.0 ? "paperset1" : "reference";
  cfg.n = 2;
  cfg.N = 3;
  cfg.geom = BodyGeometry{0.2, 0.6, 30.0};
  cfg.gains.k_v = 0.5;
  cfg.gains.k_p = k_p;
  cfg.gains.eps = 0.01;
  cfg.gains.dirs = DirectionSet::EvenlySpaced(3);
  cfg.command = CommandSignal::Circular(2, 1.0, 20.0);
  cfg.initial_state.p_o = Vec::Zero(2);
  cfg.initial_state.p_o << -8.0, 0.0;
  cfg.initial_state.v_o = Vec::Zero(2);
  cfg.initial_state.robots.resize(2, 3);
  cfg.initial_state.robots << -7.0, -9.0, -9.0,
                               1.0,  1.0, -1.0;
  cfg.dt = 1e-3;
  cfg.t_end = 60.0;
  return cfg;
}

ValidationReport validate_scenario(const ScenarioConfig& cfg) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw HardInvalid(fmt::format("{} must be positive and finite, got {:.17g}", what, v));
    }
  };
  if (cfg.n != 2 && cfg.n != 3) {
    throw HardInvalid(fmt::format("dimension n must be 2 or 3, got {}", cfg.n));
  }
  if (cfg.N < 1) throw HardInvalid("robot count N must be at least 1");
  positive(cfg.geom.robot_radius, "robot_radius");
  positive(cfg.geom.object_radius, "object_radius");
  positive(cfg.geom.k_f, "k_f");
  positive(cfg.gains.k_v, "k_v");
  positive(cfg.gains.k_p, "k_p");
  positive(cfg.gains.eps, "eps");
  positive(cfg.dt, "dt");
  if (!(cfg.t_end >= cfg.dt)) throw HardInvalid("t_end must be at least dt");

  const DirectionSet& dirs = cfg.gains.dirs;
  if (dirs.dimension() != cfg.n || dirs.count() != cfg.N) {
    throw HardInvalid(fmt::format("direction set is {}x{}, expected {}x{}", dirs.dimension(),
                                  dirs.count(), cfg.n, cfg.N));
  }
  for (int i = 0; i < dirs.count(); ++i) {
    if (std::abs(dirs.direction(i).norm() - 1.0) > kUnitNormTol) {
      throw HardInvalid(fmt::format("direction {} is not unit norm", i + 1));
    }
  }
  const SystemState& s0 = cfg.initial_state;
  if (s0.p_o.size() != cfg.n || s0.v_o.size() != cfg.n || s0.robots.rows() != cfg.n ||
      s0.robots.cols() != cfg.N) {
    throw HardInvalid("initial state dimensions do not match n and N");
  }
  if (cfg.command.dimension() != cfg.n) {
    throw HardInvalid("command signal dimension does not match n");
  }

  ValidationReport report;
  report.positively_spanning = is_positively_spanning(dirs);
  report.nwise_independent = is_nwise_independent(dirs);
  if (!report.positively_spanning) {
    report.warnings.push_back("directions do not positively span R^n");
  }
  if (!report.nwise_independent) {
    report.warnings.push_back("some n directions are linearly dependent");
  }
  const double reach = cfg.geom.contact_distance();
  for (int i = 0; i < cfg.N; ++i) {
    const Vec rel = s0.robots.col(i) - s0.p_o;
    if (rel.norm() <= kCoincidenceTol) {
      throw HardInvalid(fmt::format("robot {} starts at the object center", i + 1));
    }
    const double deviation = (rel - dirs.direction(i) * reach).norm();
    report.initial_deviation.push_back(deviation);
    if (deviation >= reach) {
      report.warnings.push_back(fmt::format(
          "robot {} starts {:.6g} from its touch point, not within D + D_o", i + 1, deviation));
    }
  }
  report.initial_speed = s0.v_o.norm();
  return report;
}

namespace {

SystemState advance(const SystemState& s, const StateDerivative& d, double h) {
  return SystemState{s.p_o + h * d.p_o_dot, s.v_o + h * d.v_o_dot,
                     s.robots + h * d.robots_dot};
}

[[noreturn]] void restamp(const CenterCoincidence& e, double t) {
  throw CenterCoincidence(e.robot(), t, fmt::format("t = {:.17g}: {}", t, e.what()));
}

ControlOutput control_at(const ScenarioConfig& cfg, const SystemState& s, double t) {
  try {
    return control_step(cfg.gains, cfg.geom, cfg.command, s, t);
  } catch (const CenterCoincidence& e) {
    restamp(e, t);
  }
}

// Closed-loop step whose first stage reuses velocities already computed at
// (state, t).
SystemState closed_loop_step(const ScenarioConfig& cfg, const SystemState& state, double t,
                             const Eigen::MatrixXd& start_velocities) {
  VelocityPolicy policy;
  if (cfg.hold == ControlHold::kZeroOrderHold) {
    policy = [&](const SystemState&, double) { return start_velocities; };
  } else {
    policy = [&](const SystemState& s, double tau) -> Eigen::MatrixXd {
      if (tau == t && &s == &state) return start_velocities;
      return control_at(cfg, s, tau).robot_velocities;
    };
  }
  return rk4_step(cfg.geom, state, t, cfg.dt, policy);
}

}  // namespace

SystemState rk4_step(const BodyGeometry& geom, const SystemState& state, double t, double h,
                     const VelocityPolicy& policy) {
  auto eval = [&](const SystemState& s, double tau) {
    try {
      return state_derivative(geom, s, policy(s, tau));
    } catch (const CenterCoincidence& e) {
      restamp(e, tau);
    }
  };
  const StateDerivative k1 = eval(state, t);
  const StateDerivative k2 = eval(advance(state, k1, 0.5 * h), t + 0.5 * h);
  const StateDerivative k3 = eval(advance(state, k2, 0.5 * h), t + 0.5 * h);
  const StateDerivative k4 = eval(advance(state, k3, h), t + h);

  const double w = h / 6.0;
  return SystemState{
      state.p_o + w * (k1.p_o_dot + 2.0 * k2.p_o_dot + 2.0 * k3.p_o_dot + k4.p_o_dot),
      state.v_o + w * (k1.v_o_dot + 2.0 * k2.v_o_dot + 2.0 * k3.v_o_dot + k4.v_o_dot),
      state.robots + w * (k1.robots_dot + 2.0 * k2.robots_dot + 2.0 * k3.robots_dot +
                          k4.robots_dot)};
}

SystemState step(const ScenarioConfig& cfg, const SystemState& state, double t) {
  const ControlOutput ctrl = control_at(cfg, state, t);
  return closed_loop_step(cfg, state, t, ctrl.robot_velocities);
}

TrajectoryLog run(const ScenarioConfig& cfg) {
  const int samples = cfg.sample_count();
  TrajectoryLog log;
  log.times.reserve(static_cast<std::size_t>(samples));

  SystemState state = cfg.initial_state;
  bool was_saturated = false;
  for (int k = 0; k < samples; ++k) {
    const double t = k * cfg.dt;
    ControlOutput ctrl;
    Eigen::MatrixXd forces(cfg.n, cfg.N);
    try {
      ctrl = control_at(cfg, state, t);
      for (int i = 0; i < cfg.N; ++i) {
        forces.col(i) = contact_force(cfg.geom, state.robots.col(i) - state.p_o, i);
      }
    } catch (const CenterCoincidence& e) {
      log.completed = false;
      log.failure = e.what();
      log.failure_time = t;
      spdlog::error("simulation stopped: {}", e.what());
      return log;
    }

    double pos_err = 0.0;
    for (int i = 0; i < cfg.N; ++i) {
      pos_err = std::max(pos_err, (state.robots.col(i) - ctrl.p_star.col(i)).norm());
    }
    if (ctrl.saturated && !was_saturated) {
      spdlog::warn("t = {:.6g}: virtual positions saturated (s*_i >= D + D_o)", t);
    }
    was_saturated = ctrl.saturated;

    log.times.push_back(t);
    log.states.push_back(state);
    log.s_star.push_back(ctrl.s_star);
    log.p_star.push_back(ctrl.p_star);
    log.robot_velocities.push_back(ctrl.robot_velocities);
    log.command_velocity.push_back(ctrl.command.velocity);
    log.vel_error_norm.push_back((state.v_o - ctrl.command.velocity).norm());
    log.pos_error_norm_max.push_back(pos_err);
    log.qp_residual.push_back(ctrl.qp_residual);
    log.u_norm.push_back(ctrl.u_norm);
    log.contact_forces.push_back(std::move(forces));
    log.saturation_flags.push_back(ctrl.saturated);

    if (k + 1 == samples) break;
    try {
      state = closed_loop_step(cfg, state, t, ctrl.robot_velocities);
    } catch (const CenterCoincidence& e) {
      log.completed = false;
      log.failure = e.what();
      log.failure_time = e.time();
      spdlog::error("simulation stopped: {}", e.what());
      return log;
    }
  }
  return log;
}

CircleFit fit_circle(const std::vector<Eigen::Vector2d>& points) {
  CircleFit fit;
  fit.points = static_cast<int>(points.size());
  if (points.size() < 3) return fit;

  // Algebraic fit: x^2 + y^2 + a x + b y + c = 0.
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Vector2d& p = points[static_cast<std::size_t>(i)];
    a.row(i) << p.x(), p.y(), 1.0;
    rhs(i) = -p.squaredNorm();
  }
  const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(rhs);
  Eigen::Vector2d center(-0.5 * coef(0), -0.5 * coef(1));
  double radius = std::sqrt(std::max(center.squaredNorm() - coef(2), 0.0));

  Eigen::MatrixXd jac(m, 3);
  Eigen::VectorXd res(m);
  for (int iter = 0; iter < 50; ++iter) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Vector2d d = points[static_cast<std::size_t>(i)] - center;
      const double dist = std::max(d.norm(), 1e-300);
      res(i) = dist - radius;
      jac.row(i) << -d.x() / dist, -d.y() / dist, -1.0;
    }
    const Eigen::Vector3d delta = jac.colPivHouseholderQr().solve(-res);
    center += delta.head<2>();
    radius += delta(2);
    if (delta.norm() < 1e-14 * std::max(1.0, radius)) break;
  }
  double sq = 0.0;
  for (const Eigen::Vector2d& p : points) {
    const double r = (p - center).norm() - radius;
    sq += r * r;
  }
  fit.center = center;
  fit.radius = radius;
  fit.rms_residual = std::sqrt(sq / static_cast<double>(points.size()));
  return fit;
}

namespace {

SeriesStats series_stats(const std::vector<double>& times, const std::vector<double>& values) {
  SeriesStats st;
  if (values.empty()) return st;
  const double tail_start = times.front() + 0.75 * (times.back() - times.front());
  double sum = 0.0;
  double tail_sum = 0.0;
  int tail_count = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    st.max = std::max(st.max, values[k]);
    sum += values[k];
    if (times[k] >= tail_start) {
      tail_sum += values[k];
      ++tail_count;
    }
  }
  st.mean = sum / static_cast<double>(values.size());
  st.tail_mean = tail_count ? tail_sum / tail_count : 0.0;
  return st;
}

}  // namespace

MetricsSummary metrics(const TrajectoryLog& log, const ScenarioConfig& cfg) {
  MetricsSummary out;
  if (log.size() == 0) return out;
  out.vel_error = series_stats(log.times, log.vel_error_norm);
  out.pos_error = series_stats(log.times, log.pos_error_norm_max);
  for (std::size_t k = 0; k < log.size(); ++k) {
    if (log.saturation_flags[k]) ++out.saturation_count;
    if (log.u_norm[k] > 1e-6) {
      out.delta_hat = std::max(out.delta_hat, log.qp_residual[k] / log.u_norm[k]);
    }
  }
  if (cfg.command.kind() == CommandSignal::Kind::kCircular && cfg.n >= 2) {
    const double start = log.times.back() - cfg.command.period();
    std::vector<Eigen::Vector2d> pts;
    for (std::size_t k = 0; k < log.size(); ++k) {
      if (log.times[k] >= start) pts.emplace_back(log.states[k].p_o(0), log.states[k].p_o(1));
    }
    CircleFit fit = fit_circle(pts);
    fit.window_start = std::max(start, log.times.front());
    if (fit.points >= 3) out.circle = fit;
  }
  return out;
}

}  // namespace cotrans
