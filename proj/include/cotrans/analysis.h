#pragma once

#include <complex>

#include <Eigen/Dense>

#include "cotrans/simulation.h"

namespace cotrans {

/// Inputs of the comparison system bounding the velocity-tracking error
/// V1 = |v_o - v_c| and the position-tracking error V2 = sum_i |p_i - p*_i|.
struct GainCertificateInput {
  double k_v = 0.0;
  double k_p = 0.0;
  double delta = 0.0;  // QP force-matching shortfall, in [0, 1)
  double L_f = 0.0;
  double L_phi = 0.0;
  int N = 0;

  /// Throws HardInvalid unless k_v > 0, k_p > 0, 0 <= delta < 1, L >= 0.
  void Validate() const;
};

/// Every figure here comes from sampled Lipschitz estimates, so `empirical`
/// is always true: a sampled maximum cannot bound the supremum.
struct GainCertificate {
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  std::complex<double> eigenvalues[2];
  bool hurwitz = false;
  /// False when k_p <= N L_phi L_f, where the small-gain product is undefined.
  bool small_gain_feasible = false;
  /// NaN when infeasible.
  double small_gain_lhs = 0.0;
  bool small_gain_ok = false;
  /// (2 - delta) / (1 - delta) * N L_phi L_f
  double kp_threshold = 0.0;
  bool kp_condition = false;
  bool empirical = true;
};

/// [[-(1-delta) k_v, L_f], [N L_phi k_v, -k_p + N L_phi L_f]]
Eigen::Matrix2d comparison_matrix(const GainCertificateInput& inp);

GainCertificate check_small_gain(const GainCertificateInput& inp);

GainCertificate certify_scenario(const ScenarioConfig& cfg, double delta_hat,
                                 double L_f_hat, double L_phi_hat);

/// Empirical estimates feeding certify_scenario.
struct LipschitzEstimates {
  double L_f = 0.0;
  double L_phi = 0.0;
  /// Largest residual ratio |k_f L s* - u| / |u| over sampled QP inputs.
  double delta = 0.0;
};

struct EstimateOptions {
  double separation_floor = 0.4;
  double sample_box = 2.0;
  int samples = 10000;
};

LipschitzEstimates estimate_constants(const ScenarioConfig& cfg,
                                      const EstimateOptions& opts = {});

}  // namespace cotrans
