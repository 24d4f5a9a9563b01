#include "cotrans/dynamics.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cotrans/errors.h"

namespace cotrans {

Vec contact_force(const BodyGeometry& geom, const Vec& rel, int robot) {
  const double dist = rel.norm();
  if (!(dist > kCoincidenceTol)) {
    throw CenterCoincidence(robot, 0.0,
                            fmt::format("robot {} center coincides with the object center "
                                        "(|p_i - p_o| = {:.17g})",
                                        robot + 1, dist));
  }
  const double penetration = std::max(geom.contact_distance() - dist, 0.0);
  if (penetration == 0.0) return Vec::Zero(rel.size());
  return (-geom.k_f * penetration / dist) * rel;
}

Vec net_force(const BodyGeometry& geom, const SystemState& state) {
  if (state.robots.rows() != state.p_o.size()) {
    throw DimensionMismatch("robot positions and object position differ in dimension");
  }
  Vec total = Vec::Zero(state.p_o.size());
  for (int i = 0; i < state.robot_count(); ++i) {
    total += contact_force(geom, state.robots.col(i) - state.p_o, i);
  }
  return total;
}

StateDerivative state_derivative(const BodyGeometry& geom, const SystemState& state,
                                 const Eigen::MatrixXd& robot_velocities) {
  if (robot_velocities.rows() != state.robots.rows() ||
      robot_velocities.cols() != state.robots.cols()) {
    throw DimensionMismatch("robot velocity matrix does not match robot positions");
  }
  return {state.v_o, net_force(geom, state), robot_velocities};
}

namespace {

Vec sample_shell(std::mt19937_64& rng, int dim, double inner, double outer) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vec dir(dim);
  do {
    for (int j = 0; j < dim; ++j) dir(j) = normal(rng);
  } while (dir.norm() < 1e-12);
  dir.normalize();
  // Uniform in volume between the two radii.
  const double a = std::pow(inner, dim);
  const double b = std::pow(outer, dim);
  const double radius = std::pow(a + (b - a) * uniform(rng), 1.0 / dim);
  return radius * dir;
}

Vec force_sum(const BodyGeometry& geom, const Eigen::MatrixXd& rel) {
  Vec total = Vec::Zero(rel.rows());
  for (Eigen::Index i = 0; i < rel.cols(); ++i) {
    total += contact_force(geom, rel.col(i), static_cast<int>(i));
  }
  return total;
}

}  // namespace

double lipschitz_estimate_f(const BodyGeometry& geom, int robot_count,
                            const ForceLipschitzOptions& opts) {
  const int dim = opts.dimension;
  const double inner = opts.separation_floor;
  const double outer =
      opts.outer_radius > 0.0 ? opts.outer_radius : 1.5 * geom.contact_distance();
  if (outer < inner) return 0.0;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  const double perturbation = 1e-3 * outer;

  double best = 0.0;
  const int pairs = std::max(opts.samples, 2);
  for (int k = 0; k < pairs; ++k) {
    Eigen::MatrixXd a(dim, robot_count);
    Eigen::MatrixXd b(dim, robot_count);
    for (int i = 0; i < robot_count; ++i) a.col(i) = sample_shell(rng, dim, inner, outer);
    if (k % 2 == 0) {
      for (int i = 0; i < robot_count; ++i) b.col(i) = sample_shell(rng, dim, inner, outer);
    } else {
      // Perturb a single robot so the other terms do not dilute the ratio.
      b = a;
      const int i = std::uniform_int_distribution<int>(0, robot_count - 1)(rng);
      Vec candidate(dim);
      do {
        for (int j = 0; j < dim; ++j) candidate(j) = a(j, i) + perturbation * normal(rng);
      } while (candidate.norm() < inner || candidate.norm() > outer);
      b.col(i) = candidate;
    }
    double denom = 0.0;
    for (int i = 0; i < robot_count; ++i) denom += (a.col(i) - b.col(i)).norm();
    if (denom <= 0.0) continue;
    best = std::max(best, (force_sum(geom, a) - force_sum(geom, b)).norm() / denom);
  }
  return best;
}

}  // namespace cotrans
