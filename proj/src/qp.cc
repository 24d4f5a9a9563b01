#include "cotrans/qp.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cotrans/errors.h"

namespace cotrans {

namespace {

std::vector<int> complement(const std::vector<bool>& active) {
  std::vector<int> free;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (!active[i]) free.push_back(static_cast<int>(i));
  }
  return free;
}

Eigen::MatrixXd sub_matrix(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

Eigen::VectorXd sub_vector(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

// Minimizer of the objective restricted to s_i = 0 outside `free`.
Eigen::VectorXd subspace_minimizer(const QpProblem& prob, const std::vector<int>& free) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(prob.size());
  if (free.empty()) return x;
  Eigen::LLT<Eigen::MatrixXd> llt(sub_matrix(prob.hessian, free));
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("reduced Hessian factorization failed");
  }
  const Eigen::VectorXd xf = llt.solve(-sub_vector(prob.linear, free));
  for (std::size_t k = 0; k < free.size(); ++k) x(free[k]) = xf(static_cast<Eigen::Index>(k));
  return x;
}

QpSolution finish(const QpProblem& prob, Eigen::VectorXd s,
                  const std::vector<bool>& active, int iterations) {
  QpSolution sol;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (active[static_cast<std::size_t>(i)] || (s(i) < 0.0 && s(i) >= -1e-12)) s(i) = 0.0;
  }
  const Eigen::VectorXd grad = prob.hessian * s + prob.linear;
  sol.multipliers = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (active[static_cast<std::size_t>(i)]) {
      sol.multipliers(i) = grad(i);
      sol.active_set.push_back(static_cast<int>(i));
    }
  }
  sol.objective = qp_objective(prob, s);
  sol.s = std::move(s);
  sol.iterations = iterations;
  return sol;
}

double problem_scale(const QpProblem& prob) {
  return std::max(1.0, prob.linear.size() ? prob.linear.cwiseAbs().maxCoeff() : 0.0);
}

}  // namespace

void QpProblem::Validate() const {
  if (hessian.rows() != linear.size() || hessian.cols() != linear.size()) {
    throw DimensionMismatch(fmt::format("Hessian is {}x{} but linear term has {} entries",
                                        hessian.rows(), hessian.cols(), linear.size()));
  }
  if (linear.size() == 0) return;
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() >= 1e-12) {
    throw NotPositiveDefinite("Hessian is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("Hessian Cholesky factorization failed");
  }
}

double qp_objective(const QpProblem& prob, const Eigen::VectorXd& s) {
  return 0.5 * s.dot(prob.hessian * s) + prob.linear.dot(s);
}

QpSolution solve_qp(const QpProblem& prob) {
  prob.Validate();
  const int n = prob.size();
  const double tol = 1e-12 * problem_scale(prob);
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  const int cap = std::max(1, 100 * n);

  for (int iter = 1; iter <= cap; ++iter) {
    const std::vector<int> free = complement(active);
    const Eigen::VectorXd x = subspace_minimizer(prob, free);

    int blocking = -1;
    double step = 1.0;
    for (int i : free) {
      if (x(i) < 0.0) {
        const double ratio = s(i) / (s(i) - x(i));
        if (ratio < step) {
          step = ratio;
          blocking = i;
        }
      }
    }

    if (blocking < 0) {
      s = x;
      const Eigen::VectorXd grad = prob.hessian * s + prob.linear;
      int release = -1;
      double most_negative = -tol;
      for (int i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)] && grad(i) < most_negative) {
          most_negative = grad(i);
          release = i;
        }
      }
      if (release < 0) return finish(prob, std::move(s), active, iter);
      active[static_cast<std::size_t>(release)] = false;
    } else {
      s += step * (x - s);
      s(blocking) = 0.0;
      active[static_cast<std::size_t>(blocking)] = true;
    }
  }
  throw MaxIterations(fmt::format("active-set method exceeded {} iterations", cap));
}

QpSolution solve_qp_oracle(const QpProblem& prob) {
  prob.Validate();
  const int n = prob.size();
  if (n > 20) throw DimensionMismatch("oracle enumeration limited to N <= 20");
  const double tol = 1e-9 * problem_scale(prob);

  struct Candidate {
    Eigen::VectorXd s;
    std::vector<bool> active;
    int active_count;
  };
  std::vector<Candidate> passing;
  const std::uint32_t masks = 1u << n;
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    std::vector<bool> active(static_cast<std::size_t>(n));
    int count = 0;
    for (int i = 0; i < n; ++i) {
      active[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
      count += active[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    const std::vector<int> free = complement(active);
    const Eigen::VectorXd x = subspace_minimizer(prob, free);
    if (n > 0 && x.minCoeff() < -tol) continue;
    const Eigen::VectorXd grad = prob.hessian * x + prob.linear;
    bool dual_ok = true;
    for (int i = 0; i < n; ++i) {
      if (active[static_cast<std::size_t>(i)] && grad(i) < -tol) dual_ok = false;
    }
    if (dual_ok) passing.push_back({x, std::move(active), count});
  }
  if (passing.empty()) throw NoKktPoint("no active set satisfies the KKT conditions");

  const Candidate* best = &passing.front();
  for (const Candidate& c : passing) {
    if ((c.s - passing.front().s).cwiseAbs().maxCoeff() > 1e-8 * problem_scale(prob)) {
      throw Ambiguous("distinct KKT points found; problem is not strictly convex");
    }
    if (c.active_count > best->active_count) best = &c;
  }
  return finish(prob, best->s, best->active, static_cast<int>(masks));
}

QpProblem assemble_qp(const DirectionSet& dirs, double k_f, double eps,
                      double k_v, const Vec& vel_error, const Vec& cmd_accel) {
  const Eigen::MatrixXd& l = dirs.matrix();
  if (vel_error.size() != l.rows() || cmd_accel.size() != l.rows()) {
    throw DimensionMismatch("QP inputs do not match the direction dimension");
  }
  QpProblem prob;
  prob.hessian = 2.0 * eps * Eigen::MatrixXd::Identity(l.cols(), l.cols()) +
                 2.0 * k_f * k_f * l.transpose() * l;
  prob.linear = 2.0 * k_f * l.transpose() * (-k_v * vel_error + cmd_accel);
  return prob;
}

double estimate_solution_lipschitz(const DirectionSet& dirs, double k_f,
                                   double eps, double k_v,
                                   const SolutionLipschitzOptions& opts) {
  const int n = dirs.dimension();
  const int count = dirs.count();
  const Eigen::MatrixXd& l = dirs.matrix();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uniform(-opts.sample_box, opts.sample_box);

  // d r / d(vel_error, cmd_accel)
  Eigen::MatrixXd input_map(n, 2 * n);
  input_map << -k_v * Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd dr = 2.0 * k_f * l.transpose() * input_map;

  double best = 0.0;
  Eigen::VectorXd prev_input;
  Eigen::VectorXd prev_s;
  for (int k = 0; k < std::max(opts.samples, 2); ++k) {
    Eigen::VectorXd input(2 * n);
    for (int j = 0; j < 2 * n; ++j) input(j) = uniform(rng);
    const QpProblem prob =
        assemble_qp(dirs, k_f, eps, k_v, input.head(n), input.tail(n));
    const QpSolution sol = solve_qp(prob);

    if (k > 0) {
      const double dist = (input - prev_input).norm();
      if (dist > 0.0) best = std::max(best, (sol.s - prev_s).norm() / dist);
    }

    std::vector<bool> active(static_cast<std::size_t>(count), false);
    for (int i : sol.active_set) active[static_cast<std::size_t>(i)] = true;
    const std::vector<int> free = complement(active);
    if (!free.empty()) {
      Eigen::MatrixXd dr_free(static_cast<Eigen::Index>(free.size()), 2 * n);
      for (std::size_t i = 0; i < free.size(); ++i) {
        dr_free.row(static_cast<Eigen::Index>(i)) = dr.row(free[i]);
      }
      const Eigen::MatrixXd jac =
          -sub_matrix(prob.hessian, free).llt().solve(dr_free);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
      best = std::max(best, svd.singularValues()(0));
    }
    prev_input = std::move(input);
    prev_s = sol.s;
  }
  return best;
}

}  // namespace cotrans
