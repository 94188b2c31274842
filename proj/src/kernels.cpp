#include "raman/kernels.hpp"

#include <cmath>

namespace raman {

Exec default_exec() {
#ifdef RAMAN_HAVE_OPENMP
  return Exec::parallel;
#else
  return Exec::serial;
#endif
}

void dense_matvec(Exec ex, const cplx* a, long n, const cplx* x, cplx* y) {
  if (ex == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
      cplx acc = 0.0;
      for (long j = 0; j < n; ++j) acc += a[i + j * n] * x[j];
      y[i] = acc;
    }
    return;
  }
  for (long i = 0; i < n; ++i) y[i] = 0.0;
  for (long j = 0; j < n; ++j) {
    const cplx xj = x[j];
    const cplx* col = a + j * n;
    for (long i = 0; i < n; ++i) y[i] += col[i] * xj;
  }
}

void dense_matvec_adjoint(Exec ex, const cplx* a, long n, const cplx* x, cplx* y) {
  // Column k of A is contiguous, so (A^dag x)_k is a contiguous dot product.
  if (ex == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) {
      const cplx* col = a + k * n;
      cplx acc = 0.0;
      for (long i = 0; i < n; ++i) acc += std::conj(col[i]) * x[i];
      y[k] = acc;
    }
    return;
  }
  for (long k = 0; k < n; ++k) {
    const cplx* col = a + k * n;
    cplx acc = 0.0;
    for (long i = 0; i < n; ++i) acc += std::conj(col[i]) * x[i];
    y[k] = acc;
  }
}

void csr_matvec(Exec ex, const CsrMatrix& a, const cplx* x, cplx* y) {
  const long rows = a.rows;
  if (ex == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < rows; ++i) {
      cplx acc = 0.0;
      for (long k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) acc += a.values[k] * x[a.col_idx[k]];
      y[i] = acc;
    }
    return;
  }
  for (long i = 0; i < rows; ++i) {
    cplx acc = 0.0;
    for (long k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) acc += a.values[k] * x[a.col_idx[k]];
    y[i] = acc;
  }
}

void phase_scale(Exec ex, const double* w, double t, const cplx* x, cplx* y, long n) {
  if (ex == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) y[k] = std::polar(1.0, -w[k] * t) * x[k];
    return;
  }
  for (long k = 0; k < n; ++k) y[k] = std::polar(1.0, -w[k] * t) * x[k];
}

cplx dot(Exec ex, const cplx* x, const cplx* y, long n) {
  if (ex == Exec::parallel) {
    double re = 0.0, im = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : re, im)
    for (long i = 0; i < n; ++i) {
      const cplx v = std::conj(x[i]) * y[i];
      re += v.real();
      im += v.imag();
    }
    return {re, im};
  }
  cplx acc = 0.0;
  for (long i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

double norm_sq(Exec ex, const cplx* x, long n) {
  if (ex == Exec::parallel) {
    double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
    for (long i = 0; i < n; ++i) acc += std::norm(x[i]);
    return acc;
  }
  double acc = 0.0;
  for (long i = 0; i < n; ++i) acc += std::norm(x[i]);
  return acc;
}

}  // namespace raman
