#pragma once

#include <Eigen/Dense>

namespace ripforge {

// Coordinates on the symmetric matrices S^n in the orthonormal basis
// {E_ii} u {(E_ij + E_ji)/sqrt(2), i < j}, so that <S, T> = svec(S)' svec(T)
// and ||S||_F = ||svec(S)||. Index order: (i, j) with i <= j, column-major,
// i.e. k = j(j+1)/2 + i.

inline int sym_dim(int n) { return n * (n + 1) / 2; }

inline int svec_index(int i, int j) {
  // requires i <= j
  return j * (j + 1) / 2 + i;
}

Eigen::VectorXd svec(const Eigen::MatrixXd& s);
Eigen::MatrixXd smat(const Eigen::VectorXd& v, int n);

// svec of the n x n identity (diagonal ones, zeros elsewhere).
Eigen::VectorXd svec_identity(int n);

// Linear functional on svec(H) representing H -> a' H b + b' H a for
// symmetric H, i.e. svec(a b' + b a').
Eigen::VectorXd svec_symmetric_outer(const Eigen::VectorXd& a,
                                     const Eigen::VectorXd& b);

// Matrix of the congruence map X -> U X U' on svec coordinates:
// sym_kronecker(U) * svec(X) = svec(U X U'). Symmetric (and PSD) whenever
// U is symmetric (PSD).
Eigen::MatrixXd sym_kronecker(const Eigen::MatrixXd& u);

}  // namespace ripforge
