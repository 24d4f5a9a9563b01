#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "cotrans/geometry.h"

namespace cotrans {

inline constexpr double kCoincidenceTol = 1e-9;

struct BodyGeometry {
  double robot_radius = 0.2;   // D
  double object_radius = 0.6;  // D_o
  double k_f = 30.0;           // acceleration per meter of penetration

  double contact_distance() const { return robot_radius + object_radius; }
};

struct SystemState {
  Vec p_o;
  Vec v_o;
  Eigen::MatrixXd robots;  // n x N, column i is p_i

  int dimension() const { return static_cast<int>(p_o.size()); }
  int robot_count() const { return static_cast<int>(robots.cols()); }
};

struct StateDerivative {
  Vec p_o_dot;
  Vec v_o_dot;
  Eigen::MatrixXd robots_dot;
};

/// Repulsive contact acceleration on the object from one robot at relative
/// position rel = p_i - p_o. Zero once |rel| >= D + D_o.
/// Throws CenterCoincidence if |rel| <= 1e-9.
Vec contact_force(const BodyGeometry& geom, const Vec& rel, int robot = 0);

/// Sum of contact forces over all robots.
Vec net_force(const BodyGeometry& geom, const SystemState& state);

StateDerivative state_derivative(const BodyGeometry& geom, const SystemState& state,
                                 const Eigen::MatrixXd& robot_velocities);

struct ForceLipschitzOptions {
  int dimension = 2;
  double separation_floor = 0.4;
  /// Outer sampling radius for |p_i - p_o|; <= 0 means 1.5 (D + D_o).
  double outer_radius = 0.0;
  int samples = 10000;
  std::uint64_t seed = 0;
};

/// Empirical lower estimate of L_f in
///   |f(a) - f(b)| <= L_f sum_i |a_i - b_i|
/// over relative positions with floor <= |a_i|, |b_i| <= outer. Half of the
/// pairs are independent draws, half move one robot by a small step.
double lipschitz_estimate_f(const BodyGeometry& geom, int robot_count,
                            const ForceLipschitzOptions& opts = {});

}  // namespace cotrans
