// AVX2 variants of the SGD hot-loop kernels. This translation unit is
// compiled with -mavx2 -mfma on x86-64 and stays self-contained (no library
// headers that could inline vector code elsewhere); it is only entered after
// the runtime CPU check in the dispatcher.

#include "ripforge/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace ripforge::kernels {
namespace {

inline double hsum(__m256d acc) {
  __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void matvec_avx2(const double* a, const double* x, double* out, int n) {
  const int nv = n & ~3;
  for (int i = 0; i < n; ++i) {
    const double* row = a + static_cast<long>(i) * n;
    __m256d acc = _mm256_setzero_pd();
    int j = 0;
    for (; j < nv; j += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j),
                            acc);
    }
    double s = hsum(acc);
    for (; j < n; ++j) s += row[j] * x[j];
    out[i] = s;
  }
}

double dot_avx2(const double* a, const double* b, int n) {
  const int nv = n & ~3;
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i < nv; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void momentum_avx2(double* x, double* v, const double* t, double beta,
                   double c, int n) {
  const int nv = n & ~3;
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vc = _mm256_set1_pd(c);
  int i = 0;
  for (; i < nv; i += 4) {
    const __m256d ct = _mm256_mul_pd(vc, _mm256_loadu_pd(t + i));
    const __m256d vn = _mm256_fmadd_pd(vb, _mm256_loadu_pd(v + i), ct);
    _mm256_storeu_pd(v + i, vn);
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_loadu_pd(x + i), vn));
  }
  for (; i < n; ++i) {
    v[i] = beta * v[i] + c * t[i];
    x[i] += v[i];
  }
}

}  // namespace

namespace detail {
extern const Dispatch avx2_table;
const Dispatch avx2_table = {matvec_avx2, dot_avx2, momentum_avx2,
                             Backend::avx2};
}  // namespace detail

}  // namespace ripforge::kernels

#else  // non-x86 hosts: table exists but is unreachable (dispatcher throws)

namespace ripforge::kernels::detail {
extern const Dispatch avx2_table;
const Dispatch avx2_table = {nullptr, nullptr, nullptr, Backend::avx2};
}  // namespace ripforge::kernels::detail

#endif
