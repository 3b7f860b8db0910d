#pragma once

#include <Eigen/Dense>

namespace ripforge {

// Symmetric PSD kernel matrix H representing the Gram form of a measurement
// map on the symmetric subspace (svec coordinates, size N = n(n+1)/2).
struct KernelMatrix {
  Eigen::MatrixXd h;
  int n = 0;

  void validate() const;  // symmetry to 1e-12, lambda_min >= -1e-10 lambda_max
};

// The first/second-order criticality conditions at x for ground truth z z'
// as linear operators of the kernel H, all in svec coordinates:
//   e    = svec(x x' - z z'),
//   Xmat : vec(u) -> svec(x u' + u x'),               N x nr
//   L(H) = 2 Xmat' H e  reshaped to n x r,
//   M(H) = 2 [I_r (x) smat(H e)] + Xmat' H Xmat,      nr x nr.
// The gradient of f at x equals L(H) and the Hessian equals 2 M(H).
struct LmiOperators {
  int n = 0;
  int r = 0;
  Eigen::MatrixXd x;          // anchor point, n x r
  Eigen::VectorXd e;          // length N
  Eigen::MatrixXd sym_product;  // Xmat, N x nr
  double x_norm = 0.0;
  double z_norm = 0.0;

  int sym_size() const { return static_cast<int>(e.size()); }

  Eigen::MatrixXd apply_l(const Eigen::MatrixXd& h) const;  // n x r
  Eigen::MatrixXd apply_m(const Eigen::MatrixXd& h) const;  // nr x nr
  Eigen::MatrixXd l_adjoint(const Eigen::MatrixXd& y) const;  // N x N
  Eigen::MatrixXd m_adjoint(const Eigen::MatrixXd& v) const;  // N x N

  // Rows are linear functionals on svec(H): row a equals svec of
  // L'(basis_a), so L(H) = 0  <=>  l_constraint_matrix() * svec(H) = 0.
  Eigen::MatrixXd l_constraint_matrix() const;  // nr x N(N+1)/2

  // M as a matrix map from svec(H) to svec_{nr}(M(H)).
  Eigen::MatrixXd m_map_matrix() const;  // nr(nr+1)/2 x N(N+1)/2

  // Orthonormal basis (nr x g) of the rotation-gauge directions
  // {vec(x G) : G antisymmetric}, the tangent space at x of the orbit
  // {x Q : Q orthogonal}, which x x' cannot see.  Along these directions
  // Xmat vanishes, and M(H) annihilates them exactly whenever L(H) = 0,
  // so M(H) is never positive definite for r >= 2.  g <= r(r-1)/2, with
  // equality iff x has full column rank; empty when r = 1.
  Eigen::MatrixXd gauge_basis() const;

  // Orthonormal basis (nr x (nr - g)) of the orthogonal complement of
  // gauge_basis(); the identity when the gauge is trivial.
  Eigen::MatrixXd gauge_complement() const;
};

// x and z must be nonzero and the same shape; throws on degenerate input.
LmiOperators build_operators(const Eigen::MatrixXd& x, const Eigen::MatrixXd& z);

}  // namespace ripforge
