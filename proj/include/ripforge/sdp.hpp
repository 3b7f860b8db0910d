#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace ripforge {

// Dense SDP in LMI form. Variables are v = [svec(H); scalars] with H an
// h_dim x h_dim symmetric matrix; each cone block is an affine matrix-valued
// map of v required PSD. Box blocks couple to H through +/- identity and are
// kept separate so the solver can use closed-form barrier derivatives.

struct BoxBlock {
  // S(v) = sign * H + (offset + scalar_coeffs . scalars) * I
  double sign = 1.0;
  double offset = 0.0;
  Eigen::VectorXd scalar_coeffs;  // length num_scalars, or empty for zero
  std::string name;
};

struct MappedBlock {
  // svec(S(v)) = const_part + map_h * svec(H) + sum_j scalar_dirs[j] * scalar_j
  int size = 0;
  Eigen::MatrixXd map_h;                     // sym_dim(size) x d_h, or empty
  Eigen::VectorXd const_part;                // sym_dim(size), or empty for zero
  std::vector<Eigen::VectorXd> scalar_dirs;  // num_scalars entries, or empty
  std::string name;
};

struct SdpProblem {
  int h_dim = 0;
  int num_scalars = 0;
  // maximize obj_h . svec(H) + obj_scalars . scalars (empty = zero)
  Eigen::VectorXd obj_h;
  Eigen::VectorXd obj_scalars;
  // eq_h * svec(H) + eq_scalars * scalars = eq_rhs (zero-row allowed)
  Eigen::MatrixXd eq_h;
  Eigen::MatrixXd eq_scalars;
  Eigen::VectorXd eq_rhs;
  std::vector<BoxBlock> box_blocks;
  std::vector<MappedBlock> mapped_blocks;
  // Set when the assembling geometry had e = 0 (x x' = z z'); downstream
  // feasibility answers are vacuous at the ground truth.
  bool degenerate_error_vector = false;

  int d_h() const { return h_dim * (h_dim + 1) / 2; }
  int dim() const { return d_h() + num_scalars; }
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, max_iterations };

const char* solve_status_name(SolveStatus s);

struct SdpSolution {
  Eigen::VectorXd h_svec;
  Eigen::VectorXd scalars;
  double objective = 0.0;
  double max_eq_violation = 0.0;
  double min_cone_eig = 0.0;
  SolveStatus status = SolveStatus::max_iterations;
  int newton_steps = 0;
  std::string message;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 200;      // total Newton steps
  double t_initial = 1.0;  // barrier path parameter start
  double t_factor = 10.0;
  std::ostream* trace = nullptr;  // per-iteration CSV when set
};

// Path-following barrier solve. Starts from H = I/2, scalars = 1/4 projected
// onto the equality manifold; runs Phase I (uniform margin maximization) when
// that point is not strictly feasible.
SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts = {});

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd h_svec;
  Eigen::VectorXd scalars;
  double margin = 0.0;  // best uniform cone margin found (or its upper bound)
  SolveStatus status = SolveStatus::max_iterations;
  int newton_steps = 0;
  bool degenerate_error_vector = false;
};

// Decides whether a point exists with every cone block at least margin * I.
// Early-exits as soon as the margin target is certified either way.
FeasibilityResult feasibility(const SdpProblem& problem, double margin = 0.0,
                              const SolveOptions& opts = {});

}  // namespace ripforge
