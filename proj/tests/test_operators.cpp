#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include <Eigen/Dense>

#include "ripforge/operators.hpp"
#include "ripforge/sensing.hpp"
#include "ripforge/symbasis.hpp"

using namespace ripforge;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937& gen) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = dist(gen);
    }
  }
  return 0.5 * (a + a.transpose()).eval();
}

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937& gen) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      a(i, j) = dist(gen);
    }
  }
  return a;
}

}  // namespace

TEST_CASE("error vector is svec of the rank difference") {
  std::mt19937 gen(201);
  for (int rep = 0; rep < 4; ++rep) {
    const int n = 2 + rep;
    const int r = 1 + rep % 2;
    const Eigen::MatrixXd x = random_matrix(n, r, gen);
    const Eigen::MatrixXd z = random_matrix(n, r, gen);
    const LmiOperators ops = build_operators(x, z);
    const Eigen::VectorXd expected =
        svec((x * x.transpose() - z * z.transpose()).eval());
    CHECK((ops.e - expected).norm() <= 1e-13 * (1.0 + expected.norm()));
    CHECK(ops.sym_size() == sym_dim(n));
  }
}

TEST_CASE("sym_product columns on the 2x2 example") {
  Eigen::MatrixXd x(2, 1), z(2, 1);
  x << 1.0, 0.0;
  z << 0.0, 1.0;
  const LmiOperators ops = build_operators(x, z);
  // Column 0: svec(x e_0' + e_0 x') = svec(2 E_00).
  CHECK(ops.sym_product(0, 0) == doctest::Approx(2.0));
  CHECK(ops.sym_product(1, 0) == doctest::Approx(0.0));
  CHECK(ops.sym_product(2, 0) == doctest::Approx(0.0));
  // Column 1: svec(x e_1' + e_1 x') = svec(E_01 + E_10).
  CHECK(ops.sym_product(0, 1) == doctest::Approx(0.0));
  CHECK(ops.sym_product(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(ops.sym_product(2, 1) == doctest::Approx(0.0));
}

TEST_CASE("sym_product matches its definition for general shapes") {
  std::mt19937 gen(203);
  const int n = 4, r = 2;
  const Eigen::MatrixXd x = random_matrix(n, r, gen);
  const Eigen::MatrixXd z = random_matrix(n, r, gen);
  const LmiOperators ops = build_operators(x, z);
  for (int a = 0; a < n * r; ++a) {
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, r);
    u(a % n, a / n) = 1.0;  // column-major unit direction
    const Eigen::MatrixXd s =
        x * u.transpose() + u * x.transpose();
    CHECK((ops.sym_product.col(a) - svec(s)).norm() <= 1e-13);
  }
}

TEST_CASE("L and M agree with the gradient and Hessian of the objective") {
  std::mt19937 gen(207);
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 2 + rep % 3;
    const int r = 1 + rep % 2;
    const int m = sym_dim(n);  // full-rank family
    std::vector<Eigen::MatrixXd> mats;
    for (int i = 0; i < m; ++i) {
      mats.push_back(random_symmetric(n, gen));
    }
    const Eigen::MatrixXd z = random_matrix(n, r, gen);
    const SensingInstance inst = SensingInstance::create(n, r, mats, z);
    const Eigen::MatrixXd x = random_matrix(n, r, gen);

    const LmiOperators ops = build_operators(x, z);
    const Eigen::MatrixXd h = gram_matrix(inst);

    const Eigen::MatrixXd g = gradient(inst, x);
    const Eigen::MatrixXd l = ops.apply_l(h);
    CHECK((g - l).norm() <= 1e-12 * (1.0 + g.norm()));

    const Eigen::MatrixXd hess = hessian(inst, x);
    const Eigen::MatrixXd mm = 2.0 * ops.apply_m(h);
    CHECK((hess - mm).norm() <= 1e-12 * (1.0 + hess.norm()));
  }
}

TEST_CASE("adjoint identities hold to machine precision") {
  std::mt19937 gen(211);
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 2 + rep % 3;
    const int r = 1 + rep % 2;
    const Eigen::MatrixXd x = random_matrix(n, r, gen);
    const Eigen::MatrixXd z = random_matrix(n, r, gen);
    const LmiOperators ops = build_operators(x, z);
    const int nn = sym_dim(n);

    const Eigen::MatrixXd h = random_symmetric(nn, gen);

    // <L(H), Y> = <H, L'(Y)>
    const Eigen::MatrixXd y = random_matrix(n, r, gen);
    const double lhs_l = (ops.apply_l(h).array() * y.array()).sum();
    const Eigen::MatrixXd lt = ops.l_adjoint(y);
    const double rhs_l = (h.array() * lt.array()).sum();
    CHECK(std::abs(lhs_l - rhs_l) <= 1e-12 * (1.0 + std::abs(lhs_l)));
    CHECK((lt - lt.transpose()).norm() <= 1e-13 * (1.0 + lt.norm()));

    // <M(H), V> = <H, M'(V)> for symmetric V.
    const Eigen::MatrixXd v = random_symmetric(n * r, gen);
    const double lhs_m = (ops.apply_m(h).array() * v.array()).sum();
    const Eigen::MatrixXd mt = ops.m_adjoint(v);
    const double rhs_m = (h.array() * mt.array()).sum();
    CHECK(std::abs(lhs_m - rhs_m) <= 1e-12 * (1.0 + std::abs(lhs_m)));
    CHECK((mt - mt.transpose()).norm() <= 1e-13 * (1.0 + mt.norm()));
  }
}

TEST_CASE("matrix forms of L and M agree with the operator forms") {
  std::mt19937 gen(213);
  const int n = 3, r = 2;
  const Eigen::MatrixXd x = random_matrix(n, r, gen);
  const Eigen::MatrixXd z = random_matrix(n, r, gen);
  const LmiOperators ops = build_operators(x, z);
  const int nn = sym_dim(n);

  const Eigen::MatrixXd lmat = ops.l_constraint_matrix();
  const Eigen::MatrixXd mmat = ops.m_map_matrix();
  CHECK(lmat.rows() == n * r);
  CHECK(lmat.cols() == sym_dim(nn));
  CHECK(mmat.rows() == sym_dim(n * r));
  CHECK(mmat.cols() == sym_dim(nn));

  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::MatrixXd h = random_symmetric(nn, gen);
    const Eigen::VectorXd hv = svec(h);

    const Eigen::MatrixXd l = ops.apply_l(h);
    const Eigen::Map<const Eigen::VectorXd> lvec(l.data(), l.size());
    CHECK((lmat * hv - lvec).norm() <= 1e-12 * (1.0 + lvec.norm()));

    const Eigen::VectorXd mv = mmat * hv;
    const Eigen::VectorXd expected = svec(ops.apply_m(h));
    CHECK((mv - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
  }
}

TEST_CASE("x = z makes the error vanish and M reduce to the quadratic term") {
  std::mt19937 gen(217);
  const int n = 3, r = 1;
  const Eigen::MatrixXd z = random_matrix(n, r, gen);
  const LmiOperators ops = build_operators(z, z);
  CHECK(ops.e.norm() <= 1e-14);
  const Eigen::MatrixXd h = random_symmetric(sym_dim(n), gen);
  CHECK((ops.apply_l(h)).norm() <= 1e-13);
  const Eigen::MatrixXd expected =
      ops.sym_product.transpose() * h * ops.sym_product;
  CHECK((ops.apply_m(h) - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
}

TEST_CASE("identity kernel reproduces the unscaled objective derivatives") {
  // With H = I the Gram form is the Euclidean norm on svec coordinates, so
  // L(I) is the gradient of ||x x' - z z'||_F^2.
  std::mt19937 gen(219);
  const int n = 3, r = 2;
  const Eigen::MatrixXd x = random_matrix(n, r, gen);
  const Eigen::MatrixXd z = random_matrix(n, r, gen);
  const LmiOperators ops = build_operators(x, z);
  const Eigen::MatrixXd id =
      Eigen::MatrixXd::Identity(sym_dim(n), sym_dim(n));
  const Eigen::MatrixXd err = x * x.transpose() - z * z.transpose();
  const Eigen::MatrixXd expected_grad = 4.0 * err * x;
  CHECK((ops.apply_l(id) - expected_grad).norm() <=
        1e-12 * (1.0 + expected_grad.norm()));
}

TEST_CASE("kernel validation") {
  KernelMatrix k;
  k.n = 2;
  k.h = Eigen::MatrixXd::Identity(3, 3);
  CHECK_NOTHROW(k.validate());
  k.h(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(k.validate(), std::invalid_argument);
  k.h(0, 1) = 0.0;
  k.h(0, 0) = -1.0;  // not PSD
  CHECK_THROWS_AS(k.validate(), std::invalid_argument);
}

TEST_CASE("degenerate inputs are rejected") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 1);
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(3, 1);
  CHECK_THROWS_AS(build_operators(x, z), std::invalid_argument);
  CHECK_THROWS_AS(build_operators(z, Eigen::MatrixXd::Ones(2, 1)),
                  std::invalid_argument);
}

TEST_CASE("gradient factors through the kernel-weighted error matrix") {
  // L(H) = 4 smat(H e) x for every symmetric H, so first-order criticality
  // L(H) = 0 is exactly smat(H e) x = 0.
  std::mt19937 gen(401);
  for (const auto [n, r] : {std::pair{3, 1}, {4, 2}, {5, 3}}) {
    const Eigen::MatrixXd x = random_matrix(n, r, gen);
    const Eigen::MatrixXd z = random_matrix(n, r, gen);
    const LmiOperators ops = build_operators(x, z);
    for (int rep = 0; rep < 5; ++rep) {
      const Eigen::MatrixXd h = random_symmetric(sym_dim(n), gen);
      const Eigen::MatrixXd expected = 4.0 * smat(h * ops.e, n) * x;
      CHECK((ops.apply_l(h) - expected).norm() <=
            1e-12 * (1.0 + expected.norm()));
    }
  }
}

TEST_CASE("rotation gauge directions annihilate X and, under L = 0, M") {
  std::mt19937 gen(409);
  for (const auto [n, r] : {std::pair{4, 2}, {5, 2}, {4, 3}}) {
    const Eigen::MatrixXd x = random_matrix(n, r, gen);
    const Eigen::MatrixXd z = random_matrix(n, r, gen);
    const LmiOperators ops = build_operators(x, z);

    const Eigen::MatrixXd basis = ops.gauge_basis();
    const Eigen::MatrixXd comp = ops.gauge_complement();
    const int g = static_cast<int>(basis.cols());
    CHECK(g == r * (r - 1) / 2);  // generic x has full column rank
    CHECK(comp.cols() == n * r - g);

    // Orthonormal, mutually orthogonal, jointly spanning.
    CHECK((basis.transpose() * basis -
           Eigen::MatrixXd::Identity(g, g)).norm() <= 1e-12);
    CHECK((comp.transpose() * comp -
           Eigen::MatrixXd::Identity(n * r - g, n * r - g)).norm() <= 1e-12);
    CHECK((basis.transpose() * comp).norm() <= 1e-12);

    // Columns really are of the form vec(x G), G antisymmetric, and X kills
    // them: svec(x G x' + x G' x') = svec(x (G + G') x') = 0.
    CHECK((ops.sym_product * basis).norm() <= 1e-12);

    // Project a random symmetric kernel onto {L(H) = 0}; the projected kernel
    // must annihilate every gauge direction through M as well.
    const Eigen::MatrixXd lmat = ops.l_constraint_matrix();
    const Eigen::MatrixXd h0 = random_symmetric(sym_dim(n), gen);
    const Eigen::VectorXd hv = svec(h0);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(lmat);
    const Eigen::VectorXd proj = hv - cod.pseudoInverse() * (lmat * hv);
    const Eigen::MatrixXd h = smat(proj, sym_dim(n));
    CHECK((lmat * proj).norm() <= 1e-9 * (1.0 + hv.norm()));
    const Eigen::MatrixXd m = ops.apply_m(h);
    CHECK((m * basis).norm() <= 1e-9 * (1.0 + m.norm()));
  }
}
