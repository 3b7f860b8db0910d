#include "ripforge/symbasis.hpp"

#include <cmath>
#include <stdexcept>

namespace ripforge {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

Eigen::VectorXd svec(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  if (s.cols() != n) throw std::invalid_argument("svec: matrix must be square");
  Eigen::VectorXd v(sym_dim(n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double sym = 0.5 * (s(i, j) + s(j, i));
      v(svec_index(i, j)) = (i == j) ? sym : kSqrt2 * sym;
    }
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v, int n) {
  if (v.size() != sym_dim(n)) throw std::invalid_argument("smat: size mismatch");
  Eigen::MatrixXd s(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double c = v(svec_index(i, j));
      if (i == j) {
        s(i, i) = c;
      } else {
        s(i, j) = c / kSqrt2;
        s(j, i) = c / kSqrt2;
      }
    }
  }
  return s;
}

Eigen::VectorXd svec_identity(int n) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(sym_dim(n));
  for (int i = 0; i < n; ++i) v(svec_index(i, i)) = 1.0;
  return v;
}

Eigen::VectorXd svec_symmetric_outer(const Eigen::VectorXd& a,
                                     const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  if (b.size() != n) throw std::invalid_argument("svec_symmetric_outer: size mismatch");
  Eigen::VectorXd v(sym_dim(n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double entry = a(i) * b(j) + a(j) * b(i);
      v(svec_index(i, j)) = (i == j) ? entry : kSqrt2 * entry;
    }
  }
  return v;
}

Eigen::MatrixXd sym_kronecker(const Eigen::MatrixXd& u) {
  const int n = static_cast<int>(u.rows());
  if (u.cols() != n) {
    throw std::invalid_argument("sym_kronecker: matrix must be square");
  }
  const int d = sym_dim(n);
  Eigen::MatrixXd k(d, d);
  constexpr double kInvSqrt2 = 0.7071067811865476;
  for (int l = 0; l < n; ++l) {
    for (int kk = 0; kk <= l; ++kk) {
      const int col = svec_index(kk, l);
      const double gc = (kk == l) ? kInvSqrt2 : 1.0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= j; ++i) {
          const int row = svec_index(i, j);
          const double gr = (i == j) ? kInvSqrt2 : 1.0;
          k(row, col) = gr * gc * (u(i, kk) * u(j, l) + u(i, l) * u(j, kk));
        }
      }
    }
  }
  return k;
}

}  // namespace ripforge
