#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cotrans {

using Vec = Eigen::VectorXd;

inline constexpr double kUnitNormTol = 1e-12;
inline constexpr double kDeterminantTol = 1e-10;
inline constexpr double kReconstructionTol = 1e-9;

/// The constant contact directions l_1..l_N, stored as the columns of an
/// n x N matrix. Construction enforces unit norm; spanning properties are
/// checked separately because the controller may be exercised on sets that
/// violate them.
class DirectionSet {
 public:
  DirectionSet() = default;

  /// Throws HardInvalid if any column is not unit norm or n < 1.
  explicit DirectionSet(Eigen::MatrixXd columns);

  /// Throws DimensionMismatch when vectors have different lengths.
  static DirectionSet FromVectors(const std::vector<Vec>& vectors);

  /// l_i = [cos 2pi(i-1)/N, sin 2pi(i-1)/N] in the plane.
  static DirectionSet EvenlySpaced(int count);

  int dimension() const { return static_cast<int>(columns_.rows()); }
  int count() const { return static_cast<int>(columns_.cols()); }
  const Eigen::MatrixXd& matrix() const { return columns_; }
  Vec direction(int i) const { return columns_.col(i); }

  /// The same set with columns reordered so that new column k is old column
  /// order[k].
  DirectionSet Permuted(const std::vector<int>& order) const;

 private:
  Eigen::MatrixXd columns_;
};

/// True iff every unit vector has a positive inner product with at least one
/// direction. For n = 2 this is the sorted angular gap test; for n >= 3 it is
/// a rank check plus feasibility of { lambda >= 1 : sum lambda_i l_i = 0 }.
bool is_positively_spanning(const DirectionSet& dirs);

/// True iff every n-subset of the directions has |det| > kDeterminantTol.
bool is_nwise_independent(const DirectionSet& dirs);

struct PositiveCombination {
  std::vector<int> indices;  // zero-based, ascending
  Vec coefficients;
  Eigen::MatrixXd basis;  // columns l_{indices[k]}
};

/// First n-subset in lexicographic order whose basis represents `target` with
/// nonnegative coefficients. Throws NoPositiveBasis if none exists.
PositiveCombination positive_combination_basis(const DirectionSet& dirs,
                                               const Vec& target);

/// Visits every k-subset of {0..n-1} in lexicographic order until `visit`
/// returns true. Returns whether a visit returned true.
template <typename Visit>
bool for_each_subset(int n, int k, Visit&& visit) {
  if (k > n || k < 0) return false;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (visit(static_cast<const std::vector<int>&>(idx))) return true;
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) return false;
    ++idx[pos];
    for (int j = pos + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace cotrans
