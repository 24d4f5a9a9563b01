#include "cotrans/analysis.h"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "cotrans/errors.h"

namespace cotrans {

void GainCertificateInput::Validate() const {
  if (!(k_v > 0.0)) throw HardInvalid(fmt::format("k_v must be positive, got {}", k_v));
  if (!(k_p > 0.0)) throw HardInvalid(fmt::format("k_p must be positive, got {}", k_p));
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw HardInvalid(fmt::format("delta must lie in [0, 1), got {}", delta));
  }
  if (!(L_f >= 0.0) || !(L_phi >= 0.0)) {
    throw HardInvalid("Lipschitz estimates must be nonnegative");
  }
  if (N < 1) throw HardInvalid("N must be positive");
}

Eigen::Matrix2d comparison_matrix(const GainCertificateInput& inp) {
  inp.Validate();
  const double coupling = inp.N * inp.L_phi;
  Eigen::Matrix2d a;
  a << -(1.0 - inp.delta) * inp.k_v, inp.L_f,
       coupling * inp.k_v, -inp.k_p + coupling * inp.L_f;
  return a;
}

GainCertificate check_small_gain(const GainCertificateInput& inp) {
  GainCertificate cert;
  cert.A = comparison_matrix(inp);

  const Eigen::EigenSolver<Eigen::Matrix2d> es(cert.A, false);
  cert.eigenvalues[0] = es.eigenvalues()(0);
  cert.eigenvalues[1] = es.eigenvalues()(1);
  cert.hurwitz = cert.eigenvalues[0].real() < 0.0 && cert.eigenvalues[1].real() < 0.0;

  const double loop = inp.N * inp.L_phi * inp.L_f;
  cert.kp_threshold = (2.0 - inp.delta) / (1.0 - inp.delta) * loop;
  cert.kp_condition = inp.k_p > cert.kp_threshold;

  if (inp.k_p > loop) {
    cert.small_gain_feasible = true;
    const double gain1 = inp.L_f / ((1.0 - inp.delta) * inp.k_v);
    const double gain2 = inp.N * inp.L_phi * inp.k_v / (inp.k_p - loop);
    cert.small_gain_lhs = gain1 * gain2;
    cert.small_gain_ok = cert.small_gain_lhs < 1.0;
  } else {
    cert.small_gain_feasible = false;
    cert.small_gain_lhs = std::numeric_limits<double>::quiet_NaN();
    cert.small_gain_ok = false;
  }
  return cert;
}

GainCertificate certify_scenario(const ScenarioConfig& cfg, double delta_hat,
                                 double L_f_hat, double L_phi_hat) {
  if (!(delta_hat >= 0.0 && delta_hat < 1.0)) {
    throw HardInvalid(fmt::format("delta estimate must lie in [0, 1), got {}", delta_hat));
  }
  GainCertificateInput inp;
  inp.k_v = cfg.gains.k_v;
  inp.k_p = cfg.gains.k_p;
  inp.delta = delta_hat;
  inp.L_f = L_f_hat;
  inp.L_phi = L_phi_hat;
  inp.N = cfg.N;
  return check_small_gain(inp);
}

LipschitzEstimates estimate_constants(const ScenarioConfig& cfg, const EstimateOptions& opts) {
  LipschitzEstimates est;
  ForceLipschitzOptions fopts;
  fopts.dimension = cfg.n;
  fopts.separation_floor = opts.separation_floor;
  fopts.samples = opts.samples;
  fopts.seed = cfg.seed;
  est.L_f = lipschitz_estimate_f(cfg.geom, cfg.N, fopts);

  SolutionLipschitzOptions sopts;
  sopts.sample_box = opts.sample_box;
  sopts.samples = opts.samples;
  sopts.seed = cfg.seed + 1;
  est.L_phi = estimate_solution_lipschitz(cfg.gains.dirs, cfg.geom.k_f, cfg.gains.eps,
                                          cfg.gains.k_v, sopts);

  std::mt19937_64 rng(cfg.seed + 2);
  std::uniform_real_distribution<double> uniform(-opts.sample_box, opts.sample_box);
  const Eigen::MatrixXd& l = cfg.gains.dirs.matrix();
  for (int k = 0; k < opts.samples; ++k) {
    Vec e(cfg.n);
    Vec a(cfg.n);
    for (int j = 0; j < cfg.n; ++j) e(j) = uniform(rng);
    for (int j = 0; j < cfg.n; ++j) a(j) = uniform(rng);
    const Vec u = cfg.gains.k_v * e - a;
    if (u.norm() <= 1e-6) continue;
    const QpSolution sol =
        solve_qp(assemble_qp(cfg.gains.dirs, cfg.geom.k_f, cfg.gains.eps, cfg.gains.k_v, e, a));
    est.delta = std::max(est.delta, (cfg.geom.k_f * (l * sol.s) - u).norm() / u.norm());
  }
  return est;
}

}  // namespace cotrans
