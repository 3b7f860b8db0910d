#pragma once

namespace ripforge::kernels {

// Hot-loop primitives for the SGD runner, provided as a scalar reference
// implementation plus an AVX2 variant selected at runtime. Both operate on
// raw contiguous arrays so the vector unit sees plain strided loads.

enum class Backend { scalar, avx2 };

struct Dispatch {
  // out = a * x for dense row-major a (n x n).
  void (*matvec)(const double* a, const double* x, double* out, int n);
  // plain dot product of length n.
  double (*dot)(const double* a, const double* b, int n);
  // heavy-ball update: v <- beta v + c t; x <- x + v (length n).
  void (*momentum_update)(double* x, double* v, const double* t, double beta,
                          double c, int n);
  Backend backend;
};

bool avx2_supported();

// Table for an explicit backend; throws std::invalid_argument when the host
// cannot run it.
const Dispatch& get(Backend backend);

// Best backend the host supports.
const Dispatch& active();

const char* backend_name(Backend backend);

}  // namespace ripforge::kernels
