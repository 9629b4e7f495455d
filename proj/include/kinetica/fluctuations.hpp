#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kinetica/network.hpp"
#include "kinetica/ssa.hpp"

namespace kinetica {

/// lambda restricted to the leaf directions has an eigenvalue with
/// non-negative real part.
class NotHurwitzError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Linearization {
  Concentrations fixed_point;
  /// lambda(v, u) = dF_v / dc_u at the fixed point.
  Eigen::MatrixXd lambda;
  /// diag(c_bar).
  Eigen::MatrixXd beta_inv;
  /// lambda * beta_inv.
  Eigen::MatrixXd gamma;
  /// Orthonormal basis of the leaf directions (see leaf_basis).
  Eigen::MatrixXd leaf;
};

/// Linearized kinetics at a strictly positive c_bar.
Linearization linearize(const ReactionNetwork& network, const Concentrations& c_bar);

struct OnsagerReport {
  bool symmetric = true;
  /// max_{u,v} |lambda_vu c_u - lambda_uv c_v| / max_{u,v} |gamma_uv|.
  double max_residual = 0.0;
  std::size_t worst_v = 0;
  std::size_t worst_u = 0;
};

OnsagerReport check_onsager(const Linearization& lin, double tol = 1e-10);

/// Eigenvalues of lambda on the leaf directions.
Eigen::VectorXcd leaf_spectrum(const Linearization& lin);

/// -max Re of the leaf spectrum; throws NotHurwitzError unless positive.
double spectral_gap(const Linearization& lin);

/// phi(t) = exp(lambda t) beta_inv. For t < 0 this returns phi(-t)^T.
Eigen::MatrixXd ou_covariance(const Linearization& lin, double t);

struct KuboOptions {
  /// Horizon T; 0 selects horizon_gaps / spectral gap.
  double horizon = 0.0;
  double horizon_gaps = 40.0;
  double tolerance = 1e-13;
  unsigned max_depth = 24;
};

struct KuboReport {
  /// integral over [0, T] of theta(t) = -lambda^2 phi(t).
  Eigen::MatrixXd lhs;
  /// gamma.
  Eigen::MatrixXd rhs;
  /// max-norm of lhs - rhs.
  double residual = 0.0;
  /// max-norm of lhs + rhs; smaller than residual flags an overall sign flip.
  double flipped_residual = 0.0;
  bool sign_discrepancy = false;
  /// max-norm of the omitted tail, |lambda exp(lambda T) beta_inv|.
  double tail_bound = 0.0;
  double quadrature_error = 0.0;
  double horizon = 0.0;
  double gap = 0.0;
};

/// Integrates theta(t) = -lambda^2 phi(t) over [0, T] by adaptive
/// Gauss-Kronrod quadrature and compares with gamma.
KuboReport kubo_check(const Linearization& lin, const KuboOptions& options = {});

struct FluctuationSeries {
  std::vector<double> times;
  /// xi[replica][time][species] = (n_v(t) - mean_v(t)) / sqrt(M).
  std::vector<std::vector<std::vector<double>>> xi;
  double scale = 1.0;
  std::uint64_t source_seed = 0;
};

struct CovarianceEstimate {
  double lag = 0.0;
  Eigen::MatrixXd value;
  Eigen::MatrixXd standard_error;
};

struct EmpiricalFluctuations {
  FluctuationSeries series;
  /// One entry per requested lag.
  std::vector<CovarianceEstimate> covariance;
  std::size_t replicas_used = 0;
};

struct EmpiricalOptions {
  /// Lags as multiples of the (uniform) sample spacing.
  std::vector<std::size_t> lag_steps{0};
  /// Time origins before this time are discarded.
  double burn_in = 0.0;
  std::size_t min_replicas = 64;
};

/// phi_hat_vw(lag) = mean over replicas and time origins t of
/// xi_v(t + lag) xi_w(t), with a replica-level standard error. Each replica's
/// average over origins is one independent sample, which accounts for the
/// autocorrelation along a trajectory.
EmpiricalFluctuations empirical_fluctuations(const Ensemble& ensemble, const EmpiricalOptions& options);

}  // namespace kinetica
