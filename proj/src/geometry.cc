#include "cotrans/geometry.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cotrans/errors.h"

namespace cotrans {

DirectionSet::DirectionSet(Eigen::MatrixXd columns)
    : columns_(std::move(columns)) {
  if (columns_.rows() < 1 || columns_.cols() < 1) {
    throw HardInvalid("direction set must contain at least one vector of dimension >= 1");
  }
  for (Eigen::Index i = 0; i < columns_.cols(); ++i) {
    const double norm = columns_.col(i).norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kUnitNormTol) {
      throw HardInvalid(fmt::format(
          "direction {} is not unit norm (|l| = {:.17g})", i + 1, norm));
    }
  }
}

DirectionSet DirectionSet::FromVectors(const std::vector<Vec>& vectors) {
  if (vectors.empty()) throw HardInvalid("direction set is empty");
  const Eigen::Index n = vectors.front().size();
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != n) {
      throw DimensionMismatch(fmt::format(
          "direction {} has dimension {}, expected {}", i + 1,
          vectors[i].size(), n));
    }
    m.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  return DirectionSet(std::move(m));
}

DirectionSet DirectionSet::EvenlySpaced(int count) {
  if (count < 1) throw HardInvalid("evenly_spaced needs at least one vector");
  Eigen::MatrixXd m(2, count);
  for (int i = 0; i < count; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / count;
    m(0, i) = std::cos(angle);
    m(1, i) = std::sin(angle);
  }
  return DirectionSet(std::move(m));
}

DirectionSet DirectionSet::Permuted(const std::vector<int>& order) const {
  Eigen::MatrixXd m(columns_.rows(), static_cast<Eigen::Index>(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    m.col(static_cast<Eigen::Index>(k)) = columns_.col(order[k]);
  }
  return DirectionSet(std::move(m));
}

namespace {

bool planar_gap_test(const Eigen::MatrixXd& l) {
  std::vector<double> angles;
  angles.reserve(static_cast<std::size_t>(l.cols()));
  for (Eigen::Index i = 0; i < l.cols(); ++i) {
    angles.push_back(std::atan2(l(1, i), l(0, i)));
  }
  std::sort(angles.begin(), angles.end());
  double max_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) {
    max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
  }
  return max_gap < std::numbers::pi - 1e-12;
}

// Phase one of the tableau simplex: is { x >= 0 : A x = b } nonempty?
// Bland's rule, so no cycling.
bool lp_feasible(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b(i) < 0) {
      a.row(i) *= -1.0;
      b(i) *= -1.0;
    }
  }
  // Columns: n originals, m artificials, then rhs.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;
  // Objective row holds reduced costs of "minimize sum of artificials".
  for (Eigen::Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
  t.block(m, n, 1, m).setZero();

  const double tol = 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff());
  for (int iter = 0; iter < 1000; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -1e-12) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) > 1e-12) {
        const double ratio = t(i, n + m) / t(i, enter);
        if (leave < 0 || ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) break;  // unbounded cannot happen in phase one
    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  return -t(m, n + m) <= tol;
}

}  // namespace

bool is_positively_spanning(const DirectionSet& dirs) {
  const Eigen::MatrixXd& l = dirs.matrix();
  const int n = dirs.dimension();
  if (dirs.count() < n + 1) return false;
  if (n == 2) return planar_gap_test(l);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(l);
  lu.setThreshold(1e-10);
  if (lu.rank() < n) return false;
  // lambda = 1 + x with x >= 0:  L x = -L 1.
  const Eigen::VectorXd rhs = -l * Eigen::VectorXd::Ones(dirs.count());
  return lp_feasible(l, rhs);
}

bool is_nwise_independent(const DirectionSet& dirs) {
  const int n = dirs.dimension();
  const int count = dirs.count();
  if (count < n) return false;
  const Eigen::MatrixXd& l = dirs.matrix();
  Eigen::MatrixXd sub(n, n);
  const bool found_dependent = for_each_subset(count, n, [&](const std::vector<int>& idx) {
    for (int k = 0; k < n; ++k) sub.col(k) = l.col(idx[static_cast<std::size_t>(k)]);
    return std::abs(sub.determinant()) <= kDeterminantTol;
  });
  return !found_dependent;
}

PositiveCombination positive_combination_basis(const DirectionSet& dirs,
                                               const Vec& target) {
  const int n = dirs.dimension();
  if (target.size() != n) {
    throw DimensionMismatch(fmt::format("target has dimension {}, expected {}",
                                        target.size(), n));
  }
  const Eigen::MatrixXd& l = dirs.matrix();
  const double scale = std::max(1.0, target.norm());
  PositiveCombination out;
  Eigen::MatrixXd sub(n, n);
  const bool found = for_each_subset(dirs.count(), n, [&](const std::vector<int>& idx) {
    for (int k = 0; k < n; ++k) sub.col(k) = l.col(idx[static_cast<std::size_t>(k)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (std::abs(lu.determinant()) <= kDeterminantTol) return false;
    Vec c = lu.solve(target);
    if (c.minCoeff() < -1e-12 * scale) return false;
    c = c.cwiseMax(0.0);
    if ((sub * c - target).norm() >= kReconstructionTol * scale) return false;
    out.indices = idx;
    out.coefficients = std::move(c);
    out.basis = sub;
    return true;
  });
  if (!found) {
    throw NoPositiveBasis(
        "no n-subset of the directions represents the target with "
        "nonnegative coefficients; the set does not positively span");
  }
  return out;
}

}  // namespace cotrans
