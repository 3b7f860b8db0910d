#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "ripforge/kernels.hpp"
#include "ripforge/rng.hpp"

using namespace ripforge;

namespace {

std::vector<double> random_array(TrialRng& rng, int n) {
  std::vector<double> a(static_cast<std::size_t>(n));
  for (double& value : a) value = rng.next_gaussian();
  return a;
}

}  // namespace

TEST_CASE("streams are determined by the seed pair") {
  TrialRng a(42, 7);
  TrialRng b(42, 7);
  for (int i = 0; i < 50; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }

  TrialRng c(42, 8);
  TrialRng d(43, 7);
  TrialRng e(42, 7);
  bool differs_c = false;
  bool differs_d = false;
  for (int i = 0; i < 50; ++i) {
    const std::uint64_t base = e.next_u64();
    differs_c |= (c.next_u64() != base);
    differs_d |= (d.next_u64() != base);
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("uniform draws stay in range") {
  TrialRng rng(3, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("bounded draws are in range and roughly uniform") {
  TrialRng rng(5, 1);
  const int n = 6;
  std::vector<int> counts(n, 0);
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    const int k = rng.next_below(n);
    REQUIRE(k >= 0);
    REQUIRE(k < n);
    counts[static_cast<std::size_t>(k)] += 1;
  }
  for (const int c : counts) {
    CHECK(std::abs(c - draws / n) < 600);  // ~6.5 sigma
  }

  TrialRng one(5, 2);
  for (int i = 0; i < 100; ++i) CHECK(one.next_below(1) == 0);
}

TEST_CASE("gaussian draws have the right first two moments") {
  TrialRng rng(11, 4);
  const int draws = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sq += g * g;
  }
  const double mean = sum / draws;
  const double var = sq / draws - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("backend names and tables are consistent") {
  CHECK(std::strcmp(kernels::backend_name(kernels::Backend::scalar),
                    "scalar") == 0);
  CHECK(std::strcmp(kernels::backend_name(kernels::Backend::avx2), "avx2") ==
        0);
  const kernels::Dispatch& scalar = kernels::get(kernels::Backend::scalar);
  CHECK(scalar.backend == kernels::Backend::scalar);
  const kernels::Dispatch& act = kernels::active();
  if (kernels::avx2_supported()) {
    CHECK(act.backend == kernels::Backend::avx2);
    CHECK(kernels::get(kernels::Backend::avx2).backend ==
          kernels::Backend::avx2);
  } else {
    CHECK(act.backend == kernels::Backend::scalar);
    CHECK_THROWS_AS(kernels::get(kernels::Backend::avx2),
                    std::invalid_argument);
  }
}

TEST_CASE("scalar momentum update matches the recurrence exactly") {
  TrialRng rng(17, 0);
  const int n = 13;
  std::vector<double> x = random_array(rng, n);
  std::vector<double> v = random_array(rng, n);
  const std::vector<double> t = random_array(rng, n);
  std::vector<double> x_ref = x;
  std::vector<double> v_ref = v;
  const double beta = 0.9, c = -0.003;

  kernels::get(kernels::Backend::scalar)
      .momentum_update(x.data(), v.data(), t.data(), beta, c, n);
  for (int i = 0; i < n; ++i) {
    v_ref[static_cast<std::size_t>(i)] =
        beta * v_ref[static_cast<std::size_t>(i)] +
        c * t[static_cast<std::size_t>(i)];
    x_ref[static_cast<std::size_t>(i)] += v_ref[static_cast<std::size_t>(i)];
  }
  CHECK(std::memcmp(x.data(), x_ref.data(), sizeof(double) * n) == 0);
  CHECK(std::memcmp(v.data(), v_ref.data(), sizeof(double) * n) == 0);
}

TEST_CASE("vector backend agrees with the scalar reference") {
  if (!kernels::avx2_supported()) {
    return;  // nothing to compare on this host
  }
  const kernels::Dispatch& scalar = kernels::get(kernels::Backend::scalar);
  const kernels::Dispatch& vec = kernels::get(kernels::Backend::avx2);
  TrialRng rng(23, 0);

  for (const int n : {1, 2, 3, 4, 5, 7, 8, 12, 16, 17, 33, 64, 100}) {
    const std::vector<double> a =
        random_array(rng, n * n);  // dense row-major matrix
    const std::vector<double> x = random_array(rng, n);
    const std::vector<double> y = random_array(rng, n);

    std::vector<double> out_s(static_cast<std::size_t>(n));
    std::vector<double> out_v(static_cast<std::size_t>(n));
    scalar.matvec(a.data(), x.data(), out_s.data(), n);
    vec.matvec(a.data(), x.data(), out_v.data(), n);
    double scale = 1.0;
    for (const double value : out_s) scale = std::max(scale, std::abs(value));
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(out_s[static_cast<std::size_t>(i)] -
                     out_v[static_cast<std::size_t>(i)]) <= 1e-13 * scale);
    }

    const double ds = scalar.dot(x.data(), y.data(), n);
    const double dv = vec.dot(x.data(), y.data(), n);
    CHECK(std::abs(ds - dv) <= 1e-13 * (1.0 + std::abs(ds)));

    std::vector<double> xs = x, vs = y, xv = x, vv = y;
    scalar.momentum_update(xs.data(), vs.data(), a.data(), 0.9, -0.01, n);
    vec.momentum_update(xv.data(), vv.data(), a.data(), 0.9, -0.01, n);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(xs[static_cast<std::size_t>(i)] -
                     xv[static_cast<std::size_t>(i)]) <= 1e-13 * scale);
      CHECK(std::abs(vs[static_cast<std::size_t>(i)] -
                     vv[static_cast<std::size_t>(i)]) <= 1e-13 * scale);
    }
  }
}
