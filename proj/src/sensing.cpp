#include "ripforge/sensing.hpp"

#include <cmath>
#include <stdexcept>

#include "ripforge/symbasis.hpp"

namespace ripforge {

namespace {

void check_shapes(const SensingInstance& inst, const CandidatePoint& x,
                  const char* op) {
  if (x.rows() != inst.n || x.cols() != inst.r) {
    throw std::invalid_argument(std::string(op) + ": candidate point is " +
                                std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + ", expected " +
                                std::to_string(inst.n) + "x" +
                                std::to_string(inst.r));
  }
}

}  // namespace

SensingInstance SensingInstance::create(int n, int r,
                                        std::vector<Eigen::MatrixXd> matrices,
                                        Eigen::MatrixXd z) {
  SensingInstance inst;
  inst.n = n;
  inst.r = r;
  inst.measurements = std::move(matrices);
  inst.ground_truth_factor = std::move(z);
  const Eigen::MatrixXd zz =
      inst.ground_truth_factor * inst.ground_truth_factor.transpose();
  inst.data.resize(inst.m());
  for (int i = 0; i < inst.m(); ++i) {
    inst.data(i) = inst.measurements[i].cwiseProduct(zz).sum();
  }
  inst.validate();
  return inst;
}

void SensingInstance::validate() const {
  if (n < 1 || r < 1) throw std::invalid_argument("instance: n, r must be >= 1");
  if (measurements.empty()) throw std::invalid_argument("instance: m must be >= 1");
  if (ground_truth_factor.rows() != n || ground_truth_factor.cols() != r) {
    throw std::invalid_argument("instance: z shape does not match (n, r)");
  }
  if (data.size() != m()) throw std::invalid_argument("instance: b length != m");
  const Eigen::MatrixXd zz = ground_truth_factor * ground_truth_factor.transpose();
  const double znorm2 = ground_truth_factor.squaredNorm();
  for (int i = 0; i < m(); ++i) {
    const Eigen::MatrixXd& a = measurements[i];
    if (a.rows() != n || a.cols() != n) {
      throw std::invalid_argument("instance: measurement " + std::to_string(i) +
                                  " is not n x n");
    }
    if (a != a.transpose().eval()) {
      throw std::invalid_argument("instance: measurement " + std::to_string(i) +
                                  " is not exactly symmetric");
    }
    if (!a.allFinite()) {
      throw std::invalid_argument("instance: measurement " + std::to_string(i) +
                                  " has non-finite entries");
    }
    const double resid = std::abs(data(i) - a.cwiseProduct(zz).sum());
    if (resid > 1e-12 * a.norm() * znorm2 + 1e-300) {
      throw std::invalid_argument("instance: b_" + std::to_string(i) +
                                  " inconsistent with <A_i, z z'>");
    }
  }
}

double objective_value(const SensingInstance& inst, const CandidatePoint& x) {
  check_shapes(inst, x, "objective_value");
  const Eigen::MatrixXd xx = x * x.transpose();
  double f = 0.0;
  for (int i = 0; i < inst.m(); ++i) {
    const double resid = inst.measurements[i].cwiseProduct(xx).sum() - inst.data(i);
    f += resid * resid;
  }
  return f;
}

Eigen::MatrixXd gradient(const SensingInstance& inst, const CandidatePoint& x) {
  check_shapes(inst, x, "gradient");
  const Eigen::MatrixXd xx = x * x.transpose();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(inst.n, inst.r);
  for (int i = 0; i < inst.m(); ++i) {
    const Eigen::MatrixXd& a = inst.measurements[i];
    const double resid = a.cwiseProduct(xx).sum() - inst.data(i);
    g.noalias() += 2.0 * resid * ((a + a.transpose()) * x);
  }
  return g;
}

Eigen::MatrixXd hessian(const SensingInstance& inst, const CandidatePoint& x) {
  check_shapes(inst, x, "hessian");
  const int n = inst.n;
  const int r = inst.r;
  const Eigen::MatrixXd xx = x * x.transpose();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * r, n * r);
  for (int i = 0; i < inst.m(); ++i) {
    const Eigen::MatrixXd& a = inst.measurements[i];
    const double resid = a.cwiseProduct(xx).sum() - inst.data(i);
    // s_i(u) = <A_i, x u' + u x'> = vec(u) . vec((A_i + A_i') x)
    const Eigen::MatrixXd sx = (a + a.transpose()) * x;
    const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(sx.data(), n * r);
    h.noalias() += 2.0 * s * s.transpose();
    // q_i(u) = <A_i, u u'> = vec(u)' (I_r (x) A_i) vec(u)
    for (int j = 0; j < r; ++j) {
      h.block(j * n, j * n, n, n) += 4.0 * resid * a;
    }
  }
  // exact symmetry regardless of accumulation order
  return 0.5 * (h + h.transpose());
}

Eigen::VectorXd apply_measurements(const SensingInstance& inst,
                                   const Eigen::MatrixXd& sym_x) {
  Eigen::VectorXd out(inst.m());
  for (int i = 0; i < inst.m(); ++i) {
    out(i) = inst.measurements[i].cwiseProduct(sym_x).sum();
  }
  return out;
}

Eigen::MatrixXd gram_matrix(const SensingInstance& inst) {
  const int nn = sym_dim(inst.n);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nn, nn);
  for (int i = 0; i < inst.m(); ++i) {
    const Eigen::VectorXd p = svec(inst.measurements[i]);
    g.selfadjointView<Eigen::Lower>().rankUpdate(p);
  }
  return Eigen::MatrixXd(g.selfadjointView<Eigen::Lower>());
}

RipReport rip_full(const SensingInstance& inst) {
  const Eigen::MatrixXd g = gram_matrix(inst);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  RipReport rep;
  rep.lambda_min = es.eigenvalues().minCoeff();
  rep.lambda_max = es.eigenvalues().maxCoeff();
  if (rep.lambda_min <= 0.0) {
    rep.rank_deficient = true;
    rep.delta_full = 1.0;
    rep.gamma = rep.lambda_max > 0.0 ? 2.0 / rep.lambda_max : 0.0;
    return rep;
  }
  rep.gamma = 2.0 / (rep.lambda_min + rep.lambda_max);
  rep.delta_full =
      (rep.lambda_max - rep.lambda_min) / (rep.lambda_max + rep.lambda_min);
  return rep;
}

double rip_restricted_lower_bound(const SensingInstance& inst,
                                  const Eigen::MatrixXd& u) {
  const int k = static_cast<int>(u.cols());
  if (u.rows() != inst.n) {
    throw std::invalid_argument("rip_restricted_lower_bound: U has wrong row count");
  }
  const Eigen::MatrixXd gram_u = u.transpose() * u;
  if ((gram_u - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("rip_restricted_lower_bound: U not orthonormal");
  }
  // W maps svec_k(Y) to svec_n(U Y U'); the restricted Gram form is W' G W.
  const int nk = sym_dim(k);
  const Eigen::MatrixXd g = gram_matrix(inst);
  Eigen::MatrixXd w(sym_dim(inst.n), nk);
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
  const Eigen::MatrixXd restricted = w.transpose() * g * w;
  const Eigen::MatrixXd metric = w.transpose() * w;  // identity for orthonormal U
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(restricted, metric,
                                                               Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmin <= 0.0) return 1.0;
  return (lmax - lmin) / (lmax + lmin);
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::strict_local_min: return "strict_local_min";
    case Verdict::second_order_critical: return "second_order_critical";
    case Verdict::first_order_only: return "first_order_only";
    case Verdict::not_critical: return "not_critical";
    case Verdict::global_min: return "global_min";
  }
  return "unknown";
}

Verdict verdict_from_name(const std::string& name) {
  if (name == "strict_local_min") return Verdict::strict_local_min;
  if (name == "second_order_critical") return Verdict::second_order_critical;
  if (name == "first_order_only") return Verdict::first_order_only;
  if (name == "not_critical") return Verdict::not_critical;
  if (name == "global_min") return Verdict::global_min;
  throw std::invalid_argument("unknown verdict name: " + name);
}

CriticalityCertificate certify(const SensingInstance& inst,
                               const CandidatePoint& x, double mu,
                               const CertifyTolerances& tols) {
  if (mu < 0.0) throw std::invalid_argument("certify: mu must be >= 0");
  const double bnorm = inst.data.norm();
  const double tol_g = tols.tol_g >= 0.0 ? tols.tol_g : 1e-9 * (1.0 + bnorm);
  const double tol_f = tols.tol_f >= 0.0 ? tols.tol_f : 1e-9 * bnorm * bnorm;

  CriticalityCertificate cert;
  cert.mu = mu;
  cert.objective_value = objective_value(inst, x);
  cert.gradient_norm = gradient(inst, x).norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian(inst, x),
                                                    Eigen::EigenvaluesOnly);
  cert.hessian_min_eig = es.eigenvalues().minCoeff();

  if (cert.objective_value <= tol_f) {
    cert.verdict = Verdict::global_min;
  } else if (cert.gradient_norm > tol_g) {
    cert.verdict = Verdict::not_critical;
  } else if (mu > 0.0 && cert.hessian_min_eig >= mu) {
    cert.verdict = Verdict::strict_local_min;
  } else if (cert.hessian_min_eig >= -tols.eig_tol) {
    cert.verdict = Verdict::second_order_critical;
  } else {
    cert.verdict = Verdict::first_order_only;
  }
  return cert;
}

}  // namespace ripforge
