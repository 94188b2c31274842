// Serial reference kernels against their OpenMP counterparts, plus the two
// evolution routes of the brute-force verifier on realistic basis sizes.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "raman/fock.hpp"
#include "raman/kernels.hpp"

using namespace raman;

namespace {

std::vector<cplx> random_vector(long n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> v(static_cast<size_t>(n));
  for (auto& z : v) z = cplx(u(rng), u(rng));
  return v;
}

CouplingParams bench_params() {
  CouplingParams p;
  p.g1 = 0.6;
  p.gm1 = 0.8;
  p.delta = 0.4;
  p.time = 0.9;
  return p;
}

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void set_exec_label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void bm_dense_matvec(benchmark::State& state) {
  const long n = state.range(1);
  auto a = random_vector(n * n, 1);
  auto x = random_vector(n, 2);
  std::vector<cplx> y(static_cast<size_t>(n));
  set_exec_label(state);
  for (auto _ : state) {
    dense_matvec(exec_of(state), a.data(), n, x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_dense_matvec_adjoint(benchmark::State& state) {
  const long n = state.range(1);
  auto a = random_vector(n * n, 3);
  auto x = random_vector(n, 4);
  std::vector<cplx> y(static_cast<size_t>(n));
  set_exec_label(state);
  for (auto _ : state) {
    dense_matvec_adjoint(exec_of(state), a.data(), n, x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_csr_matvec(benchmark::State& state) {
  fock::FockBasis basis(static_cast<int>(state.range(1)));
  CsrMatrix h = fock::hamiltonian_matrix(basis, bench_params());
  auto x = random_vector(basis.dim(), 5);
  std::vector<cplx> y(static_cast<size_t>(basis.dim()));
  set_exec_label(state);
  for (auto _ : state) {
    csr_matvec(exec_of(state), h, x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * h.nnz());
}

void bm_phase_scale(benchmark::State& state) {
  const long n = state.range(1);
  std::vector<double> w(static_cast<size_t>(n));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto& f : w) f = u(rng);
  auto x = random_vector(n, 7);
  std::vector<cplx> y(static_cast<size_t>(n));
  set_exec_label(state);
  for (auto _ : state) {
    phase_scale(exec_of(state), w.data(), 0.9, x.data(), y.data(), n);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_dot(benchmark::State& state) {
  const long n = state.range(1);
  auto x = random_vector(n, 8);
  auto y = random_vector(n, 9);
  set_exec_label(state);
  for (auto _ : state) {
    cplx d = dot(exec_of(state), x.data(), y.data(), n);
    benchmark::DoNotOptimize(d);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

// Sectored evolution: one matvec per photon-number sector.
void bm_evolver_apply(benchmark::State& state) {
  fock::FockBasis basis(static_cast<int>(state.range(1)));
  fock::Evolver ev(basis, bench_params());
  fock::TruncatedState in{basis, random_vector(basis.dim(), 10)};
  in.normalize();
  set_exec_label(state);
  for (auto _ : state) {
    auto out = ev.apply(in, 0.9, exec_of(state));
    benchmark::DoNotOptimize(out.amplitudes.data());
  }
}

// Whole-space evolution: the dense cross-check route.
void bm_full_space_apply(benchmark::State& state) {
  fock::FockBasis basis(static_cast<int>(state.range(1)));
  auto sys = fock::full_space_eigensystem(basis, bench_params());
  fock::TruncatedState in{basis, random_vector(basis.dim(), 11)};
  in.normalize();
  set_exec_label(state);
  for (auto _ : state) {
    auto out = fock::full_space_apply(sys, in, 0.9, exec_of(state));
    benchmark::DoNotOptimize(out.amplitudes.data());
  }
}

void exec_by_dim(benchmark::internal::Benchmark* b, std::initializer_list<long> dims) {
  for (long mode : {0L, 1L}) {
    for (long d : dims) b->Args({mode, d});
  }
}

BENCHMARK(bm_dense_matvec)->Apply([](auto* b) { exec_by_dim(b, {1331, 4913}); });
BENCHMARK(bm_dense_matvec_adjoint)->Apply([](auto* b) { exec_by_dim(b, {1331, 4913}); });
BENCHMARK(bm_csr_matvec)->Apply([](auto* b) { exec_by_dim(b, {10, 16}); });
BENCHMARK(bm_phase_scale)->Apply([](auto* b) { exec_by_dim(b, {1331, 35937}); });
BENCHMARK(bm_dot)->Apply([](auto* b) { exec_by_dim(b, {1331, 35937}); });
BENCHMARK(bm_evolver_apply)->Apply([](auto* b) { exec_by_dim(b, {10, 16}); });
BENCHMARK(bm_full_space_apply)->Apply([](auto* b) { exec_by_dim(b, {10, 12}); });

}  // namespace

BENCHMARK_MAIN();
