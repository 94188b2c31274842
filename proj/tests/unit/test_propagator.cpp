#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "raman/propagator.hpp"

using namespace raman;

namespace {

constexpr double kPi = std::numbers::pi;

CouplingParams params(double g1, double gm1, double delta, double t) {
  CouplingParams p;
  p.g1 = g1;
  p.gm1 = gm1;
  p.delta = delta;
  p.time = t;
  return p;
}

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  }
  return c;
}

double max_diff(const Mat3& a, const Mat3& b) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
  }
  return worst;
}

}  // namespace

TEST_CASE("full-conversion point reproduces the known matrix") {
  auto u = build_propagator(params(0.6, 0.8, 0.0, kPi / 2.0));
  CHECK(std::abs(u(kProbe, kProbe)) < 1e-15);
  CHECK(std::abs(u(kProbe, kStokes) - cplx(0.0, 0.8)) < 1e-15);
  CHECK(std::abs(u(kProbe, kAntiStokes) - cplx(0.0, 0.6)) < 1e-15);
  CHECK(std::abs(u(kAntiStokes, kAntiStokes) - cplx(0.64, 0.0)) < 1e-15);
  CHECK(std::abs(u(kStokes, kStokes) - cplx(0.36, 0.0)) < 1e-15);
  CHECK(std::abs(u(kStokes, kAntiStokes) - cplx(-0.48, 0.0)) < 1e-15);
  CHECK(u.unitarity_defect() < 1e-15);
}

TEST_CASE("zero time gives the identity") {
  auto u = build_propagator(params(1.3, 0.7, 0.4, 0.0));
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      CHECK(std::abs(u(a, b) - (a == b ? cplx(1.0, 0.0) : cplx(0.0, 0.0))) < 1e-15);
    }
  }
}

TEST_CASE("the matrix is symmetric and unitary across random parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cc(0.01, 2.0), dd(-2.0, 2.0), tt(0.0, kPi);
  for (int i = 0; i < 200; ++i) {
    auto p = params(cc(rng), cc(rng), dd(rng), tt(rng));
    auto u = build_propagator(p);
    CHECK(u.unitarity_defect() < 1e-12);
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) CHECK(std::abs(u(a, b) - u(b, a)) < 1e-15);
    }
  }
}

TEST_CASE("the three construction routes agree") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cc(0.01, 2.0), dd(-2.0, 2.0), tt(0.0, kPi);
  for (int i = 0; i < 50; ++i) {
    auto p = params(cc(rng), cc(rng), dd(rng), tt(rng));
    auto closed = build_propagator(p);
    CHECK(max_diff(propagator_via_modes(p).u, closed.u) < 1e-10);
    CHECK(max_diff(propagator_via_hamiltonian(p).u, closed.u) < 1e-10);
  }
}

TEST_CASE("propagation composes over time") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> cc(0.01, 2.0), dd(-2.0, 2.0), tt(0.0, 1.5);
  for (int i = 0; i < 50; ++i) {
    double g1 = cc(rng), gm1 = cc(rng), delta = dd(rng);
    double t1 = tt(rng), t2 = tt(rng);
    auto u1 = build_propagator(params(g1, gm1, delta, t1));
    auto u2 = build_propagator(params(g1, gm1, delta, t2));
    auto u12 = build_propagator(params(g1, gm1, delta, t1 + t2));
    CHECK(max_diff(multiply(u2.u, u1.u), u12.u) < 1e-10);
  }
}

TEST_CASE("degenerate couplings are rejected") {
  CHECK_THROWS_AS(build_propagator(params(0.0, 0.0, 0.5, 1.0)), DegenerateCouplingError);
}

TEST_CASE("small-angle branch matches the direct ratio") {
  CHECK(std::abs(sinc_gt_series(1e-7, 1.0) - std::sin(1e-7) / 1e-7) < 1e-12);
  // continuity across the branch threshold
  double below = sinc_gt(0.99e-8, 1.0);
  double above = sinc_gt(1.01e-8, 1.0);
  CHECK(std::abs(below - above) < 1e-12);
  // vanishing couplings with the branch active still give a clean matrix
  auto u = build_propagator(params(5e-9, 5e-9, 0.0, 1.0));
  CHECK(u.unitarity_defect() < 1e-12);
}

TEST_CASE("the reference phase is continuous through zero detuning") {
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    auto u = build_propagator(params(0.6, 0.8, -5e-7 + 1e-8 * i, 1.0));
    double phase = reference_phase(u);
    if (i > 0) CHECK(std::abs(phase - prev) < 1e-6);
    prev = phase;
  }
  // zero detuning leaves a real probe-to-probe entry
  auto u0 = build_propagator(params(0.6, 0.8, 0.0, 0.3));
  CHECK(reference_phase(u0) == doctest::Approx(0.0));
}

TEST_CASE("mode decomposition carries normalized weight vectors") {
  auto p = params(0.6, 0.8, 0.5, 1.0);
  auto dec = decompose_modes(p);
  CHECK(dec.coupled_weights[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(dec.coupled_weights[1] == doctest::Approx(0.8).epsilon(1e-15));
  // the uncoupled combination is orthogonal to the coupled one
  CHECK(std::abs(dec.coupled_weights[0] * dec.uncoupled_weights[0] +
                 dec.coupled_weights[1] * dec.uncoupled_weights[1]) < 1e-15);
  CHECK(dec.frequencies[0] == doctest::Approx(p.delta));
  CHECK(dec.frequencies[1] == doctest::Approx(p.g()));
  CHECK(dec.frequencies[2] == doctest::Approx(-p.g()));
  for (const auto& row : dec.normal_weights) {
    CHECK(row[0] * row[0] + row[1] * row[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  // the two normal rows are orthogonal
  CHECK(std::abs(dec.normal_weights[0][0] * dec.normal_weights[1][0] +
                 dec.normal_weights[0][1] * dec.normal_weights[1][1]) < 1e-14);
}

TEST_CASE("the generator matrix is real symmetric with the documented pattern") {
  auto p = params(0.6, 0.8, 0.5, 1.0);
  auto h = hamiltonian_spec(p);
  CHECK(h[kProbe][kAntiStokes] == doctest::Approx(-0.6));
  CHECK(h[kProbe][kStokes] == doctest::Approx(-0.8));
  CHECK(h[kStokes][kAntiStokes] == 0.0);
  CHECK(h[kStokes][kStokes] == doctest::Approx(0.5));
  CHECK(h[kProbe][kProbe] == doctest::Approx(-0.5));
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) CHECK(h[a][b] == h[b][a]);
  }
}
