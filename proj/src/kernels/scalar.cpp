#include "ripforge/kernels.hpp"

#include <stdexcept>

namespace ripforge::kernels {

namespace {

void matvec_scalar(const double* a, const double* x, double* out, int n) {
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = a + static_cast<long>(i) * n;
    for (int j = 0; j < n; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
}

double dot_scalar(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void momentum_scalar(double* x, double* v, const double* t, double beta,
                     double c, int n) {
  for (int i = 0; i < n; ++i) {
    v[i] = beta * v[i] + c * t[i];
    x[i] += v[i];
  }
}

}  // namespace

namespace detail {
const Dispatch scalar_table = {matvec_scalar, dot_scalar, momentum_scalar,
                               Backend::scalar};
// Defined in the AVX2 translation unit (compiled with -mavx2 -mfma there;
// only reachable behind the runtime CPU check).
extern const Dispatch avx2_table;
}  // namespace detail

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Dispatch& get(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return detail::scalar_table;
    case Backend::avx2:
      if (!avx2_supported()) {
        throw std::invalid_argument("kernels: host cannot run avx2 backend");
      }
      return detail::avx2_table;
  }
  throw std::invalid_argument("kernels: unknown backend");
}

const Dispatch& active() {
  return avx2_supported() ? detail::avx2_table : detail::scalar_table;
}

const char* backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace ripforge::kernels
