#include "ripforge/forge.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ripforge/symbasis.hpp"

namespace ripforge {

namespace {

bool error_vector_degenerate(const LmiOperators& ops) {
  const double scale = ops.x_norm * ops.x_norm + ops.z_norm * ops.z_norm;
  return ops.e.norm() <= 1e-12 * scale;
}

void add_equalities(const LmiOperators& ops, SdpProblem& p) {
  p.eq_h = ops.l_constraint_matrix();
  p.eq_rhs = Eigen::VectorXd::Zero(p.eq_h.rows());
  if (p.num_scalars > 0) {
    p.eq_scalars = Eigen::MatrixXd::Zero(p.eq_h.rows(), p.num_scalars);
  }
}

// Matrix of the map svec_k(Y) -> svec_n(U Y U'); columns are orthonormal
// when U is.
Eigen::MatrixXd subspace_map(const Eigen::MatrixXd& u) {
  const int n = static_cast<int>(u.rows());
  const int k = static_cast<int>(u.cols());
  Eigen::MatrixXd w(sym_dim(n), sym_dim(k));
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i <= j; ++i) {
      Eigen::MatrixXd y = Eigen::MatrixXd::Zero(k, k);
      if (i == j) {
        y(i, i) = 1.0;
      } else {
        y(i, j) = y(j, i) = 1.0 / std::sqrt(2.0);
      }
      w.col(svec_index(i, j)) = svec(u * y * u.transpose());
    }
  }
  return w;
}

void check_u_basis(const LmiOperators& ops, const Eigen::MatrixXd& u) {
  const int k = static_cast<int>(u.cols());
  if (u.rows() != ops.n || k < 1 || k > ops.n) {
    throw std::invalid_argument("delta_lb: U must be n x k with 1 <= k <= n");
  }
  if ((u.transpose() * u - Eigen::MatrixXd::Identity(k, k))
          .cwiseAbs()
          .maxCoeff() > 1e-10) {
    throw std::invalid_argument("delta_lb: U must have orthonormal columns");
  }
}

// Congruence map svec_N(H) -> svec_{Nk}(W' H W) built column-by-column.
Eigen::MatrixXd congruence_map(const Eigen::MatrixXd& w) {
  const int nn = static_cast<int>(w.rows());
  const int nk = static_cast<int>(w.cols());
  Eigen::MatrixXd t(sym_dim(nk), sym_dim(nn));
  for (int j = 0; j < nn; ++j) {
    for (int i = 0; i <= j; ++i) {
      Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(nn, nn);
      if (i == j) {
        basis(i, i) = 1.0;
      } else {
        basis(i, j) = basis(j, i) = 1.0 / std::sqrt(2.0);
      }
      t.col(svec_index(i, j)) = svec(w.transpose() * basis * w);
    }
  }
  return t;
}

// Second-order cone block, restricted to the orthogonal complement of the
// rotation-gauge directions vec(x G) (G antisymmetric).  M(H) annihilates
// those directions exactly whenever L(H) = 0, so without the restriction the
// constraint M(H) >= mu I is unsatisfiable for any mu > 0 once r >= 2, and
// the mu = 0 cone has no strict interior for the barrier to work in.  The
// restricted constraint is equivalent to M(H) >= 0 on the complement, which
// is all the positivity the geometry permits.
MappedBlock second_order_block(const LmiOperators& ops, double mu,
                               const char* name) {
  const Eigen::MatrixXd q = ops.gauge_complement();
  MappedBlock soc;
  soc.size = static_cast<int>(q.cols());
  if (soc.size == ops.n * ops.r) {
    soc.map_h = ops.m_map_matrix();
  } else {
    soc.map_h = congruence_map(q) * ops.m_map_matrix();
  }
  if (mu > 0.0) soc.const_part = -mu * svec_identity(soc.size);
  soc.name = name;
  return soc;
}

// Left-multiplying the factor by any orthogonal matrix preserves the Gram
// form, so the row energies are a free choice.  Equalize them with Givens
// rotations (each pass pins the lightest row exactly to the mean), so that
// every measurement carries the same Frobenius energy.  Uniform batch-one
// sampling then takes steps of homogeneous size instead of being dominated
// by a few heavy rows.
void balance_factor_rows(Eigen::MatrixXd& factor) {
  const int m = static_cast<int>(factor.rows());
  if (m < 2) return;
  Eigen::VectorXd d(m);
  for (int i = 0; i < m; ++i) d(i) = factor.row(i).squaredNorm();
  const double target = d.mean();
  if (target <= 0.0) return;
  for (int pass = 0; pass < 2 * m; ++pass) {
    int lo = 0, hi = 0;
    d.minCoeff(&lo);
    d.maxCoeff(&hi);
    if (d(hi) - d(lo) <= 1e-13 * target) break;
    const double g = factor.row(lo).dot(factor.row(hi));
    const double disc =
        std::sqrt(g * g - (d(hi) - target) * (d(lo) - target));
    const double q = -(g + std::copysign(disc, g));
    if (q == 0.0) break;
    // tan of the rotation angle; the root of smaller magnitude.
    const double u = (d(lo) - target) / q;
    const double c = 1.0 / std::sqrt(1.0 + u * u);
    const double s = u * c;
    const Eigen::RowVectorXd row_lo = factor.row(lo);
    factor.row(lo) = c * row_lo + s * factor.row(hi);
    factor.row(hi) = -s * row_lo + c * factor.row(hi);
    d(lo) = factor.row(lo).squaredNorm();
    d(hi) = factor.row(hi).squaredNorm();
  }
}

}  // namespace

SdpProblem assemble_feasibility(const LmiOperators& ops, double mu) {
  if (mu < 0.0) throw std::invalid_argument("assemble_feasibility: mu < 0");
  SdpProblem p;
  p.h_dim = ops.sym_size();
  p.num_scalars = 0;
  p.degenerate_error_vector = error_vector_degenerate(ops);
  add_equalities(ops, p);

  BoxBlock psd;
  psd.sign = 1.0;
  psd.offset = 0.0;
  psd.name = "H";
  p.box_blocks.push_back(std::move(psd));
  BoxBlock cap;
  cap.sign = -1.0;
  cap.offset = 1.0;
  cap.name = "I-H";
  p.box_blocks.push_back(std::move(cap));

  p.mapped_blocks.push_back(second_order_block(ops, mu, "M-muI"));
  return p;
}

SdpProblem assemble_opt(const LmiOperators& ops, double mu,
                        bool include_second_order) {
  if (mu < 0.0) throw std::invalid_argument("assemble_opt: mu < 0");
  SdpProblem p;
  p.h_dim = ops.sym_size();
  p.num_scalars = 1;  // eta
  p.obj_scalars = Eigen::VectorXd::Constant(1, 1.0);
  p.degenerate_error_vector = error_vector_degenerate(ops);
  add_equalities(ops, p);

  BoxBlock lower;
  lower.sign = 1.0;
  lower.offset = 0.0;
  lower.scalar_coeffs = Eigen::VectorXd::Constant(1, -1.0);
  lower.name = "H-etaI";
  p.box_blocks.push_back(std::move(lower));
  BoxBlock upper;
  upper.sign = -1.0;
  upper.offset = 1.0;
  upper.name = "I-H";
  p.box_blocks.push_back(std::move(upper));

  MappedBlock eta_pos;
  eta_pos.size = 1;
  eta_pos.scalar_dirs = {Eigen::VectorXd::Constant(1, 1.0)};
  eta_pos.name = "eta";
  p.mapped_blocks.push_back(std::move(eta_pos));

  if (include_second_order) {
    MappedBlock soc = second_order_block(ops, mu, "M-muI");
    soc.scalar_dirs = {Eigen::VectorXd()};
    p.mapped_blocks.push_back(std::move(soc));
  }
  return p;
}

SdpProblem assemble_delta_lb(const LmiOperators& ops,
                             const Eigen::MatrixXd& u_basis, double delta) {
  if (delta < 0.0 || delta > 1.0) {
    throw std::invalid_argument("assemble_delta_lb: delta outside [0, 1]");
  }
  check_u_basis(ops, u_basis);
  SdpProblem p;
  p.h_dim = ops.sym_size();
  p.num_scalars = 0;
  p.degenerate_error_vector = error_vector_degenerate(ops);
  add_equalities(ops, p);

  BoxBlock psd;
  psd.sign = 1.0;
  psd.name = "H";
  p.box_blocks.push_back(std::move(psd));
  BoxBlock cap;
  cap.sign = -1.0;
  cap.offset = 8.0;
  cap.name = "8I-H";
  p.box_blocks.push_back(std::move(cap));

  p.mapped_blocks.push_back(second_order_block(ops, 0.0, "M"));

  const Eigen::MatrixXd w = subspace_map(u_basis);
  const Eigen::MatrixXd t = congruence_map(w);
  const int nk = static_cast<int>(w.cols());
  MappedBlock lower;
  lower.size = nk;
  lower.map_h = t;
  lower.const_part = -(1.0 - delta) * svec_identity(nk);
  lower.name = "WHW-(1-d)G";
  p.mapped_blocks.push_back(std::move(lower));
  MappedBlock upper;
  upper.size = nk;
  upper.map_h = -t;
  upper.const_part = (1.0 + delta) * svec_identity(nk);
  upper.name = "(1+d)G-WHW";
  p.mapped_blocks.push_back(std::move(upper));
  return p;
}

SdpProblem assemble_delta_lb_joint(const LmiOperators& ops,
                                   const Eigen::MatrixXd& u_basis) {
  SdpProblem p = assemble_delta_lb(ops, u_basis, 0.0);
  p.num_scalars = 1;  // delta, minimized
  p.obj_scalars = Eigen::VectorXd::Constant(1, -1.0);
  if (p.eq_h.size() > 0) {
    p.eq_scalars = Eigen::MatrixXd::Zero(p.eq_h.rows(), 1);
  }
  const int nk = sym_dim(static_cast<int>(u_basis.cols()));
  // Blocks: [H, 8I-H, M, WHW-(1-d)G, (1+d)G-WHW] in assembly order.
  auto& lower = p.mapped_blocks[1];
  lower.scalar_dirs = {svec_identity(nk)};
  auto& upper = p.mapped_blocks[2];
  upper.scalar_dirs = {svec_identity(nk)};
  auto& soc = p.mapped_blocks[0];
  soc.scalar_dirs = {Eigen::VectorXd()};

  MappedBlock dpos;
  dpos.size = 1;
  dpos.scalar_dirs = {Eigen::VectorXd::Constant(1, 1.0)};
  dpos.name = "delta";
  p.mapped_blocks.push_back(std::move(dpos));
  MappedBlock dcap;
  dcap.size = 1;
  dcap.const_part = Eigen::VectorXd::Constant(1, 1.0);
  dcap.scalar_dirs = {Eigen::VectorXd::Constant(1, -1.0)};
  dcap.name = "1-delta";
  p.mapped_blocks.push_back(std::move(dcap));
  return p;
}

double delta_lb(const LmiOperators& ops, const Eigen::MatrixXd& u_basis,
                const SolveOptions& opts, int iterations) {
  check_u_basis(ops, u_basis);
  double lo = 0.0;
  double hi = 1.0;
  // delta = 1 is always feasible (H = I on range(W)'s complement ... take
  // H = 0: sandwich needs (1-1) <= 0 <= 2, M(0) = 0 >= 0, L(0) = 0).
  // The slightly asymmetric split keeps probes away from exactly-rational
  // thresholds (engineered geometries sit at values like 1/2), where the
  // margin program is degenerate: its optimum is exactly zero and no finite
  // budget can settle the sign.
  constexpr double kSplit = 0.525;
  for (int it = 0; it < iterations; ++it) {
    const double mid = lo + kSplit * (hi - lo);
    const SdpProblem p = assemble_delta_lb(ops, u_basis, mid);
    const FeasibilityResult fr = feasibility(p, 0.0, opts);
    if (fr.status == SolveStatus::max_iterations) {
      // Within a hair of the threshold the margin question drops below the
      // solver's resolution and an undecided answer is expected; by then the
      // bracket is tighter than anything downstream can distinguish, so the
      // confirmed upper end is the honest return.  Far from the threshold an
      // undecided solve is a genuine failure.
      if (hi - lo <= 1e-4) break;
      throw SolverFailure("delta_lb: feasibility solve exhausted iterations");
    }
    if (fr.feasible) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

SensingInstance factor_kernel(const KernelMatrix& kernel,
                              const Eigen::MatrixXd& z, double rank_tol) {
  kernel.validate();
  if (z.rows() != kernel.n || z.cols() < 1) {
    throw std::invalid_argument("factor_kernel: z shape mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kernel.h);
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmax <= 0.0) {
    throw std::invalid_argument("factor_kernel: kernel is numerically zero");
  }
  std::vector<int> kept;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > rank_tol * lmax) kept.push_back(i);
  }
  if (kept.empty()) {
    throw std::invalid_argument("factor_kernel: no measurements above rank_tol");
  }
  const int m = static_cast<int>(kept.size());
  Eigen::MatrixXd factor(m, kernel.h.rows());
  for (int k = 0; k < m; ++k) {
    factor.row(k) = std::sqrt(es.eigenvalues()(kept[k])) *
                    es.eigenvectors().col(kept[k]).transpose();
  }
  balance_factor_rows(factor);
  std::vector<Eigen::MatrixXd> matrices;
  matrices.reserve(m);
  for (int k = 0; k < m; ++k) {
    Eigen::MatrixXd a = smat(factor.row(k).transpose(), kernel.n);
    a = 0.5 * (a + a.transpose()).eval();
    matrices.push_back(std::move(a));
  }
  SensingInstance inst =
      SensingInstance::create(kernel.n, static_cast<int>(z.cols()),
                              std::move(matrices), z);
  const Eigen::MatrixXd gram = gram_matrix(inst);
  if ((gram - kernel.h).norm() > 1e-8 * std::max(kernel.h.norm(), 1e-300)) {
    throw std::runtime_error(
        "factor_kernel: factor does not reproduce the kernel Gram form");
  }
  return inst;
}

ForgeResult forge_from_pair(const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                            double mu, const SolveOptions& opts) {
  const LmiOperators ops = build_operators(x, z);
  const SdpProblem problem = assemble_opt(ops, mu, true);
  const SdpSolution sol = solve(problem, opts);
  if (sol.status != SolveStatus::optimal) {
    std::ostringstream msg;
    msg << "forge: optimization form ended " << solve_status_name(sol.status)
        << " (" << sol.message << ")";
    throw SolverFailure(msg.str());
  }
  ForgeResult res;
  res.kernel.n = ops.n;
  res.kernel.h = smat(sol.h_svec, ops.sym_size());
  res.kernel.h = 0.5 * (res.kernel.h + res.kernel.h.transpose()).eval();
  res.eta = sol.scalars(0);
  if (res.eta <= 0.0 || res.eta > 1.0 + 1e-9) {
    std::ostringstream msg;
    msg << "forge: solved eta " << res.eta << " outside (0, 1]";
    throw SolverFailure(msg.str());
  }
  res.delta_n = (1.0 - res.eta) / (1.0 + res.eta);
  res.instance = factor_kernel(res.kernel, z);
  res.certificate = certify(res.instance, x, mu);
  res.x_loc = x;
  return res;
}

}  // namespace ripforge
