#include <random>
#include <vector>

#include "doctest.h"
#include "raman/kernels.hpp"

using namespace raman;

namespace {

std::vector<cplx> random_vector(std::mt19937_64& rng, long n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<cplx> v(static_cast<size_t>(n));
  for (auto& x : v) x = cplx(d(rng), d(rng));
  return v;
}

// Random sparse matrix with a fixed number of entries per row.
CsrMatrix random_csr(std::mt19937_64& rng, long n, int per_row) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::uniform_int_distribution<long> col(0, n - 1);
  CsrMatrix a;
  a.rows = n;
  a.cols = n;
  a.row_ptr.push_back(0);
  for (long r = 0; r < n; ++r) {
    for (int k = 0; k < per_row; ++k) {
      a.col_idx.push_back(col(rng));
      a.values.push_back(cplx(d(rng), d(rng)));
    }
    a.row_ptr.push_back(static_cast<long>(a.values.size()));
  }
  return a;
}

}  // namespace

TEST_CASE("parallel dense products equal the serial reference") {
  std::mt19937_64 rng(17);
  for (long n : {1L, 7L, 64L, 331L}) {
    auto a = random_vector(rng, n * n);
    auto x = random_vector(rng, n);
    std::vector<cplx> ys(static_cast<size_t>(n)), yp(static_cast<size_t>(n));
    dense_matvec(Exec::serial, a.data(), n, x.data(), ys.data());
    dense_matvec(Exec::parallel, a.data(), n, x.data(), yp.data());
    for (long i = 0; i < n; ++i) CHECK(ys[static_cast<size_t>(i)] == yp[static_cast<size_t>(i)]);

    dense_matvec_adjoint(Exec::serial, a.data(), n, x.data(), ys.data());
    dense_matvec_adjoint(Exec::parallel, a.data(), n, x.data(), yp.data());
    for (long i = 0; i < n; ++i) CHECK(ys[static_cast<size_t>(i)] == yp[static_cast<size_t>(i)]);
  }
}

TEST_CASE("adjoint product matches the conjugate-transposed direct product") {
  std::mt19937_64 rng(19);
  long n = 23;
  auto a = random_vector(rng, n * n);
  auto x = random_vector(rng, n);
  std::vector<cplx> direct(static_cast<size_t>(n)), adj(static_cast<size_t>(n));
  // build A^dag explicitly (column-major storage: a[i + j*n] = A(i, j))
  std::vector<cplx> at(static_cast<size_t>(n * n));
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      at[static_cast<size_t>(i + j * n)] = std::conj(a[static_cast<size_t>(j + i * n)]);
    }
  }
  dense_matvec(Exec::serial, at.data(), n, x.data(), direct.data());
  dense_matvec_adjoint(Exec::serial, a.data(), n, x.data(), adj.data());
  for (long i = 0; i < n; ++i) {
    CHECK(std::abs(direct[static_cast<size_t>(i)] - adj[static_cast<size_t>(i)]) < 1e-12);
  }
}

TEST_CASE("parallel sparse product equals the serial reference") {
  std::mt19937_64 rng(23);
  auto a = random_csr(rng, 500, 4);
  auto x = random_vector(rng, 500);
  std::vector<cplx> ys(500), yp(500);
  csr_matvec(Exec::serial, a, x.data(), ys.data());
  csr_matvec(Exec::parallel, a, x.data(), yp.data());
  for (size_t i = 0; i < ys.size(); ++i) CHECK(ys[i] == yp[i]);
}

TEST_CASE("phase scaling applies the expected factors in both paths") {
  std::mt19937_64 rng(29);
  long n = 257;
  auto x = random_vector(rng, n);
  std::vector<double> w(static_cast<size_t>(n));
  std::normal_distribution<double> d(0.0, 2.0);
  for (auto& v : w) v = d(rng);
  double t = 0.7;
  std::vector<cplx> ys(static_cast<size_t>(n)), yp(static_cast<size_t>(n));
  phase_scale(Exec::serial, w.data(), t, x.data(), ys.data(), n);
  phase_scale(Exec::parallel, w.data(), t, x.data(), yp.data(), n);
  for (long i = 0; i < n; ++i) {
    auto idx = static_cast<size_t>(i);
    CHECK(ys[idx] == yp[idx]);
    cplx expected = std::exp(cplx(0.0, -w[idx] * t)) * x[idx];
    CHECK(std::abs(ys[idx] - expected) < 1e-14);
  }
}

TEST_CASE("reductions agree between paths within reassociation error") {
  std::mt19937_64 rng(31);
  long n = 4913;
  auto x = random_vector(rng, n);
  auto y = random_vector(rng, n);
  cplx ds = dot(Exec::serial, x.data(), y.data(), n);
  cplx dp = dot(Exec::parallel, x.data(), y.data(), n);
  CHECK(std::abs(ds - dp) < 1e-10 * std::abs(ds) + 1e-12);
  double ns = norm_sq(Exec::serial, x.data(), n);
  double np = norm_sq(Exec::parallel, x.data(), n);
  CHECK(ns == doctest::Approx(np).epsilon(1e-12));
  // conjugation sits on the left argument
  cplx self = dot(Exec::serial, x.data(), x.data(), n);
  CHECK(self.imag() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(self.real() == doctest::Approx(ns).epsilon(1e-12));
}
