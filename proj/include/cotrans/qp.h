#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cotrans/geometry.h"

namespace cotrans {

/// minimize 1/2 s'Rs + r's  subject to  s >= 0, with R symmetric positive
/// definite.
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;

  int size() const { return static_cast<int>(linear.size()); }

  /// Throws DimensionMismatch, NotPositiveDefinite (also for asymmetric R).
  void Validate() const;
};

struct QpSolution {
  Eigen::VectorXd s;
  /// KKT multipliers of s >= 0; zero on the free set.
  Eigen::VectorXd multipliers;
  /// Zero-based indices held at s_i = 0.
  std::vector<int> active_set;
  double objective = 0.0;
  int iterations = 0;
};

/// Primal active-set method starting from s = 0 with every bound active.
/// A bound whose multiplier is exactly zero stays active.
/// Throws NotPositiveDefinite, MaxIterations (cap 100 * N).
QpSolution solve_qp(const QpProblem& prob);

/// Enumerates all 2^N active sets. Verification oracle; N <= 20.
/// Throws NoKktPoint or Ambiguous.
QpSolution solve_qp_oracle(const QpProblem& prob);

double qp_objective(const QpProblem& prob, const Eigen::VectorXd& s);

/// R = 2 eps I + 2 k_f^2 L'L,  r = 2 k_f L'(-k_v vel_error + cmd_accel).
QpProblem assemble_qp(const DirectionSet& dirs, double k_f, double eps,
                      double k_v, const Vec& vel_error, const Vec& cmd_accel);

struct SolutionLipschitzOptions {
  double sample_box = 2.0;
  int samples = 10000;
  std::uint64_t seed = 0;
};

/// Empirical lower estimate of the Lipschitz constant of
/// (vel_error, cmd_accel) -> s*. Inputs are drawn uniformly from
/// [-box, box]^{2n}. The estimate is the larger of the secant ratios over
/// consecutive sample pairs and the spectral norm of the exact local
/// Jacobian of the piecewise-affine solution map at each sample.
double estimate_solution_lipschitz(const DirectionSet& dirs, double k_f,
                                   double eps, double k_v,
                                   const SolutionLipschitzOptions& opts = {});

}  // namespace cotrans
