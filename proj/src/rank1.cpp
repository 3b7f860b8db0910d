#include "ripforge/rank1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ripforge/symbasis.hpp"

namespace ripforge {

namespace {

void check_pair(const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  if (x.size() != z.size()) {
    throw std::invalid_argument("rank1: x and z must have the same length");
  }
  if (x.norm() == 0.0 || z.norm() == 0.0) {
    throw std::invalid_argument("rank1: x and z must be nonzero");
  }
}

// Projection of e onto range(X) plus the pieces the H0 recipe needs.
struct Plane {
  Eigen::VectorXd e_hat;  // e / ||e||
  Eigen::VectorXd u;      // unit projection direction, in range(X)
  Eigen::VectorXd w;      // unit residual direction, orthogonal to range(X)
  double cos_theta = 0.0;
  double sin_theta = 0.0;
};

Plane split_error(const LmiOperators& ops) {
  const double en = ops.e.norm();
  if (en == 0.0) {
    throw std::invalid_argument("rank1: colinear x and z (e = 0)");
  }
  Plane pl;
  pl.e_hat = ops.e / en;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(ops.sym_product);
  const Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ())
                                .leftCols(ops.sym_product.cols());
  const Eigen::VectorXd p = q * (q.transpose() * pl.e_hat);
  const Eigen::VectorXd resid = pl.e_hat - p;
  const double pn = p.norm();
  const double rn = resid.norm();
  if (pn <= 1e-13 || rn <= 1e-13) {
    throw std::invalid_argument(
        "rank1: degenerate angle between e and range(X)");
  }
  pl.u = p / pn;
  pl.w = resid / rn;
  pl.cos_theta = pn;
  pl.sin_theta = rn;
  return pl;
}

}  // namespace

Rank1Geometry geometry(const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  check_pair(x, z);
  Rank1Geometry g;
  const double xn = x.norm();
  const double zn = z.norm();
  g.rho = xn / zn;
  const double c = std::clamp(x.dot(z) / (xn * zn), -1.0, 1.0);
  g.phi = std::acos(c);
  g.e_norm = (x * x.transpose() - z * z.transpose()).norm();
  const double s2 = 1.0 - c * c;  // sin^2 phi
  const double r2 = g.rho * g.rho;
  const double denom = std::sqrt((r2 - 1.0) * (r2 - 1.0) + 2.0 * r2 * s2);
  g.zeta = (denom > 0.0) ? s2 / denom : 0.0;
  g.zeta = std::clamp(g.zeta, 0.0, 1.0);
  g.theta = std::asin(g.zeta);
  g.tau = (g.zeta > 0.0)
              ? 2.0 * std::sqrt(r2 + 1.0 / r2) / (g.zeta * g.zeta)
              : std::numeric_limits<double>::infinity();
  return g;
}

FocValues foc_values(const Rank1Geometry& geom) {
  if (!(geom.zeta > 0.0)) {
    throw std::invalid_argument(
        "foc_values: zeta = 0 (colinear pair), condition number unbounded");
  }
  FocValues f;
  f.delta_foc = std::sqrt(std::max(0.0, 1.0 - geom.zeta * geom.zeta));
  f.cond_star = (1.0 + f.delta_foc) / (1.0 - f.delta_foc);
  return f;
}

SocValues soc_values(const Rank1Geometry& geom, double z_norm) {
  if (!(geom.zeta > 0.0) || !std::isfinite(geom.tau)) {
    throw std::invalid_argument("soc_values: degenerate geometry");
  }
  if (!(z_norm > 0.0)) {
    throw std::invalid_argument("soc_values: z_norm must be positive");
  }
  const double d = std::sqrt(std::max(0.0, 1.0 - geom.zeta * geom.zeta));
  SocValues s;
  s.delta_soc = (geom.tau + d) / (1.0 + geom.tau);
  s.mu = z_norm * z_norm / (1.0 + geom.tau);
  s.eta_lb = (1.0 - d) / ((1.0 + geom.tau) * (1.0 + d));
  return s;
}

KernelMatrix construct_h0(const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  check_pair(x, z);
  const LmiOperators ops = build_operators(x, z);
  const Plane pl = split_error(ops);
  const int nn = ops.sym_size();

  // Measured angle keeps L(H0) = 0 at machine precision even when the
  // closed-form zeta differs in the last bits.
  const double theta = std::atan2(pl.sin_theta, pl.cos_theta);
  const double eta = (1.0 - pl.cos_theta) / (1.0 + pl.cos_theta);
  const double psi = 0.5 * (theta + M_PI);
  const Eigen::VectorXd q = std::cos(psi) * pl.u + std::sin(psi) * pl.w;

  KernelMatrix kern;
  kern.n = static_cast<int>(x.size());
  kern.h = Eigen::MatrixXd::Identity(nn, nn);
  kern.h += (eta - 1.0) *
            (pl.u * pl.u.transpose() + pl.w * pl.w.transpose());
  kern.h += (1.0 - eta) * q * q.transpose();
  kern.h = 0.5 * (kern.h + kern.h.transpose()).eval();

  // Verify the construction before handing it out.
  const double lnorm = ops.apply_l(kern.h).norm();
  const double scale = ops.e.norm() * ops.sym_product.norm();
  if (lnorm > 1e-10 * std::max(scale, 1.0)) {
    throw std::runtime_error("construct_h0: first-order identity failed");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kern.h,
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (std::min(std::abs(lam - eta), std::abs(lam - 1.0)) > 1e-10) {
      throw std::runtime_error("construct_h0: spectrum left {eta, 1}");
    }
  }
  const Rank1Geometry geom = geometry(x, z);
  const FocValues foc = foc_values(geom);
  const double cond = lmax / lmin;
  if (std::abs(cond - foc.cond_star) > 1e-8 * foc.cond_star) {
    throw std::runtime_error(
        "construct_h0: condition number drifted from the closed form");
  }
  return kern;
}

HTauResult construct_h_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  check_pair(x, z);
  const LmiOperators ops = build_operators(x, z);
  const KernelMatrix h0 = construct_h0(x, z);
  const Rank1Geometry geom = geometry(x, z);
  const FocValues foc = foc_values(geom);
  if (!std::isfinite(geom.tau)) {
    throw std::invalid_argument("construct_h_tau: degenerate geometry");
  }
  const int nn = ops.sym_size();
  const Eigen::VectorXd e_hat = ops.e / ops.e.norm();
  const Eigen::MatrixXd p_perp =
      Eigen::MatrixXd::Identity(nn, nn) - e_hat * e_hat.transpose();

  double tau = geom.tau;
  for (int attempt = 0; attempt <= 4; ++attempt) {
    HTauResult res;
    res.tau_used = tau;
    res.kernel.n = h0.n;
    res.kernel.h = (tau * p_perp + h0.h) / (1.0 + tau);
    res.kernel.h = 0.5 * (res.kernel.h + res.kernel.h.transpose()).eval();

    const double lnorm = ops.apply_l(res.kernel.h).norm();
    const double scale = ops.e.norm() * ops.sym_product.norm();
    if (lnorm > 1e-10 * std::max(scale, 1.0)) {
      throw std::runtime_error("construct_h_tau: first-order identity failed");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        ops.apply_m(res.kernel.h), Eigen::EigenvaluesOnly);
    const double mu = es.eigenvalues().minCoeff();
    if (mu > 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(
          res.kernel.h, Eigen::EigenvaluesOnly);
      const double cond =
          hs.eigenvalues().maxCoeff() / hs.eigenvalues().minCoeff();
      if (cond > (1.0 + tau) * foc.cond_star * (1.0 + 1e-8)) {
        throw std::runtime_error(
            "construct_h_tau: condition number exceeded (1+tau) cond_star");
      }
      res.mu_achieved = mu;
      return res;
    }
    tau *= 2.0;
  }
  throw std::runtime_error(
      "construct_h_tau: M stayed indefinite after doubling tau 4 times");
}

double trace_ratio(const Eigen::MatrixXd& msym) {
  if (msym.rows() != msym.cols()) {
    throw std::invalid_argument("trace_ratio: matrix must be square");
  }
  const double scale = std::max(1.0, msym.cwiseAbs().maxCoeff());
  if ((msym - msym.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("trace_ratio: matrix must be symmetric");
  }
  if (msym.trace() < -1e-12 * scale) {
    throw std::invalid_argument("trace_ratio: trace must be nonnegative");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(msym,
                                                    Eigen::EigenvaluesOnly);
  double pos = 0.0;
  double neg = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > 0.0) pos += lam;
    if (lam < 0.0) neg -= lam;
  }
  if (pos == 0.0) {
    throw std::invalid_argument("trace_ratio: no positive eigenvalues");
  }
  return neg / pos;
}

std::pair<double, double> lt_adjoint_eigs(const Eigen::VectorXd& y,
                                          const LmiOperators& ops) {
  if (ops.r != 1) {
    throw std::invalid_argument("lt_adjoint_eigs: rank-1 operators required");
  }
  if (y.size() != ops.n) {
    throw std::invalid_argument("lt_adjoint_eigs: y must be an n-vector");
  }
  const double en = ops.e.norm();
  if (en == 0.0) throw std::invalid_argument("lt_adjoint_eigs: e = 0");
  const Eigen::VectorXd xy = ops.sym_product * y;
  const double xyn = xy.norm();
  if (xyn == 0.0) throw std::invalid_argument("lt_adjoint_eigs: Xy = 0");
  const double cosy = ops.e.dot(xy) / (en * xyn);
  return {xyn * en * (cosy + 1.0), xyn * en * (cosy - 1.0)};
}

SocBounds lemma_soc_bounds(const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                           const KernelMatrix& h0) {
  check_pair(x, z);
  const LmiOperators ops = build_operators(x, z);
  if (ops.e.norm() == 0.0) {
    throw std::invalid_argument("lemma_soc_bounds: colinear pair (e = 0)");
  }
  if (h0.h.rows() != ops.sym_size()) {
    throw std::invalid_argument("lemma_soc_bounds: kernel size mismatch");
  }
  const Rank1Geometry geom = geometry(x, z);
  SocBounds out;

  const Eigen::MatrixXd he = smat(h0.h * ops.e, ops.n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_he(he,
                                                       Eigen::EigenvaluesOnly);
  out.mat_bound = es_he.eigenvalues().cwiseAbs().maxCoeff();

  const Eigen::VectorXd e_hat = ops.e / ops.e.norm();
  const Eigen::MatrixXd p_perp =
      Eigen::MatrixXd::Identity(ops.sym_size(), ops.sym_size()) -
      e_hat * e_hat.transpose();
  const Eigen::MatrixXd xpx = ops.sym_product.transpose() * p_perp *
                              ops.sym_product;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_x(
      0.5 * (xpx + xpx.transpose()), Eigen::EigenvaluesOnly);
  out.xpx_bound = es_x.eigenvalues().minCoeff();

  const double zn2 = z.squaredNorm();
  const double r2 = geom.rho * geom.rho;
  const double mat_rhs = std::sqrt(1.0 + r2 * r2) * zn2;
  const double xpx_rhs = 2.0 * x.squaredNorm() * geom.zeta * geom.zeta;
  if (out.mat_bound > mat_rhs + 1e-10 * std::max(1.0, mat_rhs)) {
    throw std::runtime_error("lemma_soc_bounds: mat(H0 e) bound violated");
  }
  if (out.xpx_bound < xpx_rhs - 1e-10 * std::max(1.0, xpx_rhs)) {
    throw std::runtime_error(
        "lemma_soc_bounds: X' P_perp X eigenvalue bound violated");
  }
  return out;
}

}  // namespace ripforge
