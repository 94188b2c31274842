#pragma once

#include <vector>

#include "raman/common.hpp"

namespace raman {

// Every kernel has a serial reference path and an OpenMP path selected at the
// call site. The parallel matvec/phase variants write each output element from
// exactly one thread, so they are deterministic; dot and norm_sq reassociate
// the sum and are kept out of report-producing code paths.
enum class Exec { serial, parallel };

Exec default_exec();

struct CsrMatrix {
  long rows = 0;
  long cols = 0;
  std::vector<long> row_ptr;  // size rows + 1
  std::vector<long> col_idx;
  std::vector<cplx> values;

  long nnz() const { return static_cast<long>(values.size()); }
};

// y = A x, A dense column-major n x n.
void dense_matvec(Exec ex, const cplx* a, long n, const cplx* x, cplx* y);

// y = A^dag x.
void dense_matvec_adjoint(Exec ex, const cplx* a, long n, const cplx* x, cplx* y);

void csr_matvec(Exec ex, const CsrMatrix& a, const cplx* x, cplx* y);

// y_k = exp(-i w_k t) x_k.
void phase_scale(Exec ex, const double* w, double t, const cplx* x, cplx* y, long n);

// conj(x) . y
cplx dot(Exec ex, const cplx* x, const cplx* y, long n);

double norm_sq(Exec ex, const cplx* x, long n);

}  // namespace raman
