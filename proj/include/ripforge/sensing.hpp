#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ripforge {

// A matrix-sensing instance: symmetric measurement matrices A_1..A_m, a
// ground-truth factor z (n x r), and noiseless data b_i = <A_i, z z'>.
struct SensingInstance {
  int n = 0;
  int r = 0;
  std::vector<Eigen::MatrixXd> measurements;
  Eigen::MatrixXd ground_truth_factor;  // z, n x r
  Eigen::VectorXd data;                 // b, length m

  int m() const { return static_cast<int>(measurements.size()); }

  // Builds the instance from matrices and z, computing b = A(z z').
  static SensingInstance create(int n, int r,
                                std::vector<Eigen::MatrixXd> matrices,
                                Eigen::MatrixXd z);

  // Re-checks all type invariants (used after deserialization); throws
  // std::invalid_argument with a description on violation.
  void validate() const;
};

// Candidate points are plain n x r matrices; shapes are checked at use sites.
using CandidatePoint = Eigen::MatrixXd;

// Extreme Rayleigh quotients of ||A(X)||^2 / ||X||_F^2 over symmetric X,
// with the optimal RIP scaling.
struct RipReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double gamma = 0.0;       // 2 / (lambda_min + lambda_max)
  double delta_full = 1.0;  // (lambda_max - lambda_min) / (lambda_max + lambda_min)
  bool rank_deficient = false;
};

enum class Verdict {
  strict_local_min,
  second_order_critical,
  first_order_only,
  not_critical,
  global_min,
};

const char* verdict_name(Verdict v);
Verdict verdict_from_name(const std::string& name);

struct CriticalityCertificate {
  double objective_value = 0.0;
  double gradient_norm = 0.0;
  double hessian_min_eig = 0.0;
  double mu = 0.0;  // strictness margin requested
  Verdict verdict = Verdict::not_critical;
};

struct CertifyTolerances {
  // Negative values mean "derive the default from the instance":
  // tol_g = 1e-9 (1 + ||b||), tol_f = 1e-9 ||b||^2, eig_tol = 1e-10.
  double tol_g = -1.0;
  double tol_f = -1.0;
  double eig_tol = 1e-10;
};

// f(x) = sum_i (<A_i, x x'> - b_i)^2
double objective_value(const SensingInstance& inst, const CandidatePoint& x);

// grad f(x) = sum_i 2 r_i (A_i + A_i') x with r_i = <A_i, x x'> - b_i
Eigen::MatrixXd gradient(const SensingInstance& inst, const CandidatePoint& x);

// True second derivative as an nr x nr matrix over vec(u) (column-major):
// vec(u)' H vec(u) = d^2/dt^2 f(x + t u) = sum_i 2 s_i^2 + 4 r_i q_i.
Eigen::MatrixXd hessian(const SensingInstance& inst, const CandidatePoint& x);

// A(X) for symmetric X.
Eigen::VectorXd apply_measurements(const SensingInstance& inst,
                                   const Eigen::MatrixXd& sym_x);

// Gram matrix of the measurement map in svec coordinates:
// svec(X)' G svec(X) = ||A(X)||^2. Size N x N with N = n(n+1)/2.
Eigen::MatrixXd gram_matrix(const SensingInstance& inst);

RipReport rip_full(const SensingInstance& inst);

// Best delta such that (1 - delta) ||U Y U'||^2 <= gamma ||A(U Y U')||^2
// <= (1 + delta) ||U Y U'||^2 for all symmetric Y, with optimal gamma.
// U must have orthonormal columns. Lower-bounds the true (k, delta_k).
double rip_restricted_lower_bound(const SensingInstance& inst,
                                  const Eigen::MatrixXd& u);

CriticalityCertificate certify(const SensingInstance& inst,
                               const CandidatePoint& x, double mu,
                               const CertifyTolerances& tols = {});

}  // namespace ripforge
