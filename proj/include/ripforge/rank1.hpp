#pragma once

#include <Eigen/Dense>
#include <utility>

#include "ripforge/operators.hpp"

namespace ripforge {

// Closed-form constructions for rank-1 candidate/ground-truth pairs: the
// scalar geometry of (x, z), the optimal first-order kernel H0, and the
// second-order kernel H_tau = (tau P_{e-perp} + H0) / (1 + tau).

struct Rank1Geometry {
  double rho = 0.0;     // ||x|| / ||z||
  double phi = 0.0;     // angle between x and z, in [0, pi]
  double e_norm = 0.0;  // ||x x' - z z'||_F
  double zeta = 0.0;    // sin of the angle theta between e and range(X)
  double theta = 0.0;
  double tau = 0.0;     // second-order inflation factor (inf when zeta = 0)
};

struct FocValues {
  double cond_star = 0.0;  // (1 + sqrt(1-zeta^2)) / (1 - sqrt(1-zeta^2))
  double delta_foc = 0.0;  // sqrt(1-zeta^2) = (cond-1)/(cond+1)
};

struct SocValues {
  double eta_lb = 0.0;     // 1 / ((1 + tau) cond_star)
  double mu = 0.0;         // ||z||^2 / (1 + tau)
  double delta_soc = 0.0;  // (tau + sqrt(1-zeta^2)) / (1 + tau)
};

struct HTauResult {
  KernelMatrix kernel;
  double mu_achieved = 0.0;  // measured lambda_min(M(H_tau))
  double tau_used = 0.0;     // after any doubling fallback
};

struct SocBounds {
  double mat_bound = 0.0;  // ||mat(H0 e)||_2, at most sqrt(1+rho^4) ||z||^2
  double xpx_bound = 0.0;  // lambda_min(X' P_{e-perp} X), at least 2||x||^2 zeta^2
};

// Scalar geometry of the pair; tolerates colinear inputs (zeta = 0, tau = inf).
Rank1Geometry geometry(const Eigen::VectorXd& x, const Eigen::VectorXd& z);

// Optimal first-order condition number; requires zeta > 0.
FocValues foc_values(const Rank1Geometry& geom);

// Second-order certificate values; requires zeta > 0 and finite tau.
SocValues soc_values(const Rank1Geometry& geom, double z_norm);

// Best-conditioned kernel with L(H0) = 0: identity off the plane spanned by
// the projection of e onto range(X) and its residual; eigenvalues {eta, 1}
// with eta = (1 - sqrt(1-zeta^2)) / (1 + sqrt(1-zeta^2)). All claimed
// properties are re-verified numerically before returning.
KernelMatrix construct_h0(const Eigen::VectorXd& x, const Eigen::VectorXd& z);

// (tau P_{e-perp} + H0) / (1 + tau) with tau doubled up to 4 times if the
// measured lambda_min(M) is not positive; throws when even that fails.
HTauResult construct_h_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& z);

// tr(M-) / tr(M+) over the eigen-sign split of a symmetric matrix with
// nonnegative trace.
double trace_ratio(const Eigen::MatrixXd& msym);

// The two nonzero eigenvalues ||Xy|| ||e|| (cos(theta_y) +/- 1) of the
// rank-two matrix L'(y); requires Xy != 0 and e != 0.
std::pair<double, double> lt_adjoint_eigs(const Eigen::VectorXd& y,
                                          const LmiOperators& ops);

// Computes ||mat(H0 e)||_2 and lambda_min(X' P_{e-perp} X) and asserts the
// two bounds they satisfy; throws if either is violated beyond 1e-10 slack.
SocBounds lemma_soc_bounds(const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                           const KernelMatrix& h0);

}  // namespace ripforge
