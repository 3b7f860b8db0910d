#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "ripforge/operators.hpp"
#include "ripforge/sdp.hpp"
#include "ripforge/sensing.hpp"

namespace ripforge {

// Thrown when an SDP solve underlying a forge pipeline does not reach a
// usable answer (distinct from invalid-input errors).
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ForgeResult {
  KernelMatrix kernel;
  double eta = 0.0;      // achieved eta in (0, 1]
  double delta_n = 1.0;  // (1 - eta) / (1 + eta)
  SensingInstance instance;
  CriticalityCertificate certificate;
  CandidatePoint x_loc;  // the engineered spurious point
};

// Feasibility form: L(H) = 0, M(H) >= mu I, 0 <= H <= I. The identity cap
// normalizes the free scale of H (mu is only meaningful relative to it).
SdpProblem assemble_feasibility(const LmiOperators& ops, double mu);

// Optimization form: maximize eta s.t. L(H) = 0, eta I <= H <= I,
// M(H) >= mu I, eta >= 0. Dropping the second-order block recovers the
// first-order-only problem with closed-form optimum 1/cond_star.
SdpProblem assemble_opt(const LmiOperators& ops, double mu,
                        bool include_second_order = true);

// Restricted-isometry necessity form at a fixed delta: L(H) = 0, M(H) >= 0,
// 0 <= H <= 8 I, and (1-delta) G <= W' H W <= (1+delta) G where W maps
// symmetric k x k Y to svec(U Y U') and G = W'W = I for orthonormal U.
// The 8 I cap bounds H off range(W); any witness from the optimization form
// fits under it after rescaling.
SdpProblem assemble_delta_lb(const LmiOperators& ops,
                             const Eigen::MatrixXd& u_basis, double delta);

// Joint form minimizing delta directly (used as a cross-check oracle for the
// bisection driver).
SdpProblem assemble_delta_lb_joint(const LmiOperators& ops,
                                   const Eigen::MatrixXd& u_basis);

// Bisection on delta over [0, 1] with feasibility calls; 40 iterations.
double delta_lb(const LmiOperators& ops, const Eigen::MatrixXd& u_basis,
                const SolveOptions& opts = {}, int iterations = 40);

// Factor a PSD kernel into measurement matrices whose Gram form reproduces
// it: eigendecompose, drop eigenvalues below rank_tol * lambda_max, and mix
// the remaining rows orthogonally so every measurement carries equal
// Frobenius energy (the Gram form is invariant under that mixing, but
// batch-one stochastic gradients are not dominated by a few heavy rows).
SensingInstance factor_kernel(const KernelMatrix& kernel,
                              const Eigen::MatrixXd& z,
                              double rank_tol = 1e-10);

// Full pipeline: solve the optimization form at (x, z), factor the kernel,
// and certify x on the recovered instance (strictness margin mu).
ForgeResult forge_from_pair(const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                            double mu, const SolveOptions& opts = {});

}  // namespace ripforge
