#include "ripforge/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "ripforge/symbasis.hpp"

namespace ripforge {

namespace {

// Columns vec(x G_k) for the canonical antisymmetric generators
// G_k = E_ij - E_ji (i < j).  Not yet orthonormalized.
Eigen::MatrixXd gauge_candidates(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  const int r = static_cast<int>(x.cols());
  Eigen::MatrixXd cand(n * r, r * (r - 1) / 2);
  int c = 0;
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < j; ++i) {
      Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(r, r);
      gen(i, j) = 1.0;
      gen(j, i) = -1.0;
      const Eigen::MatrixXd u = x * gen;
      cand.col(c++) = Eigen::Map<const Eigen::VectorXd>(u.data(), n * r);
    }
  }
  return cand;
}

}  // namespace

void KernelMatrix::validate() const {
  if (h.rows() != h.cols() || h.rows() != sym_dim(n)) {
    throw std::invalid_argument("kernel: H must be N x N with N = n(n+1)/2");
  }
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("kernel: H not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(lmax, 1e-300)) {
    throw std::invalid_argument("kernel: H indefinite beyond tolerance");
  }
}

LmiOperators build_operators(const Eigen::MatrixXd& x, const Eigen::MatrixXd& z) {
  if (x.rows() != z.rows() || x.cols() != z.cols()) {
    throw std::invalid_argument("build_operators: x and z shapes differ");
  }
  if (x.norm() == 0.0 || z.norm() == 0.0) {
    throw std::invalid_argument("build_operators: x and z must be nonzero");
  }
  LmiOperators ops;
  ops.n = static_cast<int>(x.rows());
  ops.r = static_cast<int>(x.cols());
  ops.x = x;
  ops.x_norm = x.norm();
  ops.z_norm = z.norm();
  ops.e = svec(x * x.transpose() - z * z.transpose());
  ops.sym_product.resize(sym_dim(ops.n), ops.n * ops.r);
  for (int j = 0; j < ops.r; ++j) {
    for (int i = 0; i < ops.n; ++i) {
      Eigen::MatrixXd u = Eigen::MatrixXd::Zero(ops.n, ops.r);
      u(i, j) = 1.0;
      ops.sym_product.col(j * ops.n + i) =
          svec(x * u.transpose() + u * x.transpose());
    }
  }
  return ops;
}

Eigen::MatrixXd LmiOperators::apply_l(const Eigen::MatrixXd& h) const {
  const Eigen::VectorXd v = 2.0 * sym_product.transpose() * (h * e);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), n, r);
}

Eigen::MatrixXd LmiOperators::apply_m(const Eigen::MatrixXd& h) const {
  const Eigen::MatrixXd he = smat(h * e, n);
  Eigen::MatrixXd m = sym_product.transpose() * h * sym_product;
  for (int j = 0; j < r; ++j) {
    m.block(j * n, j * n, n, n) += 2.0 * he;
  }
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd LmiOperators::l_adjoint(const Eigen::MatrixXd& y) const {
  if (y.rows() != n || y.cols() != r) {
    throw std::invalid_argument("l_adjoint: y must be n x r");
  }
  const Eigen::VectorXd xy =
      sym_product * Eigen::Map<const Eigen::VectorXd>(y.data(), n * r);
  return e * xy.transpose() + xy * e.transpose();
}

Eigen::MatrixXd LmiOperators::m_adjoint(const Eigen::MatrixXd& v) const {
  if (v.rows() != n * r || v.cols() != n * r) {
    throw std::invalid_argument("m_adjoint: V must be nr x nr");
  }
  // Partial trace of the first term's adjoint: D = sum_j V_jj (n x n blocks).
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < r; ++j) {
    d += v.block(j * n, j * n, n, n);
  }
  d = 0.5 * (d + d.transpose()).eval();
  const Eigen::VectorXd dv = svec(d);
  Eigen::MatrixXd out = dv * e.transpose() + e * dv.transpose();
  out.noalias() += sym_product * v * sym_product.transpose();
  return out;
}

Eigen::MatrixXd LmiOperators::l_constraint_matrix() const {
  const int nn = sym_size();
  Eigen::MatrixXd rows(n * r, sym_dim(nn));
  for (int a = 0; a < n * r; ++a) {
    rows.row(a) = svec_symmetric_outer(sym_product.col(a), e).transpose();
  }
  return rows;
}

Eigen::MatrixXd LmiOperators::m_map_matrix() const {
  const int nn = sym_size();
  const int dh = sym_dim(nn);
  const int dm = sym_dim(n * r);
  Eigen::MatrixXd map(dm, dh);
  // Column k is svec(M(E_k)) for the k-th orthonormal basis matrix E_k of S^N.
  for (int j = 0; j < nn; ++j) {
    for (int i = 0; i <= j; ++i) {
      Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(nn, nn);
      if (i == j) {
        basis(i, i) = 1.0;
      } else {
        basis(i, j) = basis(j, i) = 1.0 / std::sqrt(2.0);
      }
      map.col(svec_index(i, j)) = svec(apply_m(basis));
    }
  }
  return map;
}

Eigen::MatrixXd LmiOperators::gauge_basis() const {
  if (r < 2) return Eigen::MatrixXd(n * r, 0);
  const Eigen::MatrixXd cand = gauge_candidates(x);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cand);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  if (rank == 0) return Eigen::MatrixXd(n * r, 0);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n * r, rank);
}

Eigen::MatrixXd LmiOperators::gauge_complement() const {
  const int nr = n * r;
  if (r < 2) return Eigen::MatrixXd::Identity(nr, nr);
  const Eigen::MatrixXd cand = gauge_candidates(x);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cand);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  if (rank == 0) return Eigen::MatrixXd::Identity(nr, nr);
  const Eigen::MatrixXd qfull =
      qr.householderQ() * Eigen::MatrixXd::Identity(nr, nr);
  return qfull.rightCols(nr - rank);
}

}  // namespace ripforge
