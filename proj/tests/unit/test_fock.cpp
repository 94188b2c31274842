#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "raman/fock.hpp"

using namespace raman;
using namespace raman::fock;

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

TruncatedState basis_state(const FockBasis& basis, int ns, int np, int na) {
  TruncatedState s{basis, std::vector<cplx>(static_cast<size_t>(basis.dim()), cplx(0.0, 0.0))};
  s.amplitudes[static_cast<size_t>(basis.index_of(ns, np, na))] = 1.0;
  return s;
}

TruncatedState random_state(const FockBasis& basis, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  TruncatedState s{basis, std::vector<cplx>(static_cast<size_t>(basis.dim()))};
  for (auto& a : s.amplitudes) a = cplx(d(rng), d(rng));
  s.normalize();
  return s;
}

double max_amp_diff(const TruncatedState& a, const TruncatedState& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.amplitudes.size(); ++i) {
    worst = std::max(worst, std::abs(a.amplitudes[i] - b.amplitudes[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("basis indexing round-trips and bounds are enforced") {
  FockBasis basis(4);
  CHECK(basis.dim() == 125);
  CHECK(basis.per_mode_dim() == 5);
  for (int ns = 0; ns <= 4; ++ns) {
    for (int np = 0; np <= 4; ++np) {
      for (int na = 0; na <= 4; ++na) {
        long idx = basis.index_of(ns, np, na);
        auto occ = basis.occupations(idx);
        CHECK(occ[0] == ns);
        CHECK(occ[1] == np);
        CHECK(occ[2] == na);
      }
    }
  }
  CHECK_THROWS_AS(FockBasis(-1), ValidationError);
  CHECK_THROWS_AS(FockBasis(FockBasis::kHardCeiling + 1), ResourceError);
}

TEST_CASE("tail mass counts exactly the levels touching the cutoff") {
  FockBasis basis(3);
  auto s = basis_state(basis, 0, 1, 0);
  CHECK(s.tail_mass() == 0.0);
  auto edge = basis_state(basis, 0, 3, 0);
  CHECK(edge.tail_mass() == doctest::Approx(1.0));
  TruncatedState half{basis, std::vector<cplx>(static_cast<size_t>(basis.dim()))};
  half.amplitudes[static_cast<size_t>(basis.index_of(0, 0, 0))] = std::sqrt(0.75);
  half.amplitudes[static_cast<size_t>(basis.index_of(3, 0, 1))] = std::sqrt(0.25);
  CHECK(half.tail_mass() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(half.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("ladder matrices implement the truncated commutator") {
  FockBasis basis(3);
  const int n_max = basis.n_max();
  for (int mode = 0; mode < kModeCount; ++mode) {
    auto lower = annihilation_matrix(basis, mode);
    auto raise = creation_matrix(basis, mode);
    // apply (b b^dag - b^dag b) to every basis ket of this mode
    for (int n = 0; n <= n_max; ++n) {
      auto ket = mode == 0 ? basis_state(basis, n, 0, 0)
                           : (mode == 1 ? basis_state(basis, 0, n, 0) : basis_state(basis, 0, 0, n));
      std::vector<cplx> tmp(ket.amplitudes.size()), up(ket.amplitudes.size()),
          down(ket.amplitudes.size());
      csr_matvec(Exec::serial, raise, ket.amplitudes.data(), tmp.data());
      csr_matvec(Exec::serial, lower, tmp.data(), up.data());
      csr_matvec(Exec::serial, lower, ket.amplitudes.data(), tmp.data());
      csr_matvec(Exec::serial, raise, tmp.data(), down.data());
      // commutator action: +1 everywhere except -n_max on the cutoff level
      double expected = n < n_max ? 1.0 : -static_cast<double>(n_max);
      for (size_t i = 0; i < up.size(); ++i) {
        cplx c = up[i] - down[i];
        cplx want = ket.amplitudes[i] * expected;
        CHECK(std::abs(c - want) < 1e-14);
      }
    }
  }
}

TEST_CASE("the generator is hermitian and conserves total occupation") {
  FockBasis basis(4);
  auto p = params(0.6, 0.8, 0.5, 1.0);
  auto h = hamiltonian_matrix(basis, p);
  std::mt19937_64 rng(5);
  auto x = random_state(basis, rng);
  auto y = random_state(basis, rng);
  std::vector<cplx> hx(x.amplitudes.size()), hy(y.amplitudes.size());
  csr_matvec(Exec::serial, h, x.amplitudes.data(), hx.data());
  csr_matvec(Exec::serial, h, y.amplitudes.data(), hy.data());
  cplx left = dot(Exec::serial, hx.data(), y.amplitudes.data(), basis.dim());
  cplx right = dot(Exec::serial, x.amplitudes.data(), hy.data(), basis.dim());
  CHECK(std::abs(left - right) < 1e-12);

  // no coupling out of a fixed total-occupation sector
  auto ket = basis_state(basis, 1, 1, 0);
  std::vector<cplx> hket(ket.amplitudes.size());
  csr_matvec(Exec::serial, h, ket.amplitudes.data(), hket.data());
  for (long i = 0; i < basis.dim(); ++i) {
    auto occ = basis.occupations(i);
    if (occ[0] + occ[1] + occ[2] != 2) CHECK(hket[static_cast<size_t>(i)] == cplx(0.0, 0.0));
  }
}

TEST_CASE("evolution preserves norm, starts at identity, and composes") {
  FockBasis basis(5);
  auto p = params(0.6, 0.8, 0.5, 0.0);
  Evolver ev(basis, p);
  std::mt19937_64 rng(7);
  auto x = random_state(basis, rng);
  auto still = ev.apply(x, 0.0, Exec::serial);
  CHECK(max_amp_diff(still, x) < 1e-12);
  auto a = ev.apply(x, 0.4, Exec::serial);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
  auto b = ev.apply(a, 0.35, Exec::serial);
  auto direct = ev.apply(x, 0.75, Exec::serial);
  CHECK(max_amp_diff(b, direct) < 1e-10);
}

TEST_CASE("the vacuum is left exactly alone") {
  FockBasis basis(4);
  auto vac = basis_state(basis, 0, 0, 0);
  auto out = evolve(vac, params(0.6, 0.8, 0.5, 1.3));
  CHECK(std::abs(out.amplitudes[0] - cplx(1.0, 0.0)) < 1e-14);
  for (size_t i = 1; i < out.amplitudes.size(); ++i) CHECK(std::abs(out.amplitudes[i]) < 1e-14);
}

TEST_CASE("a single probe photon splits by the matrix column") {
  FockBasis basis(4);
  auto in = basis_state(basis, 0, 1, 0);
  auto out = evolve(in, params(0.6, 0.8, 0.0, kPi / 2.0));
  CHECK(std::abs(out.amplitudes[static_cast<size_t>(basis.index_of(1, 0, 0))] - cplx(0.0, 0.8)) <
        1e-12);
  CHECK(std::abs(out.amplitudes[static_cast<size_t>(basis.index_of(0, 0, 1))] - cplx(0.0, 0.6)) <
        1e-12);
  CHECK(std::abs(out.amplitudes[static_cast<size_t>(basis.index_of(0, 1, 0))]) < 1e-12);
}

TEST_CASE("sectored and full-space evolution agree") {
  FockBasis basis(4);
  auto p = params(0.9, 0.4, -0.3, 0.8);
  std::mt19937_64 rng(11);
  auto x = random_state(basis, rng);
  EvolveOptions opt;
  opt.tail_tol = 2.0;  // random states load the cutoff; not under test here
  auto sectored = evolve(x, p, opt);
  auto full = evolve_full_space(x, p, EigenDriver::automatic, Exec::serial);
  CHECK(max_amp_diff(sectored, full) < 1e-12);
}

TEST_CASE("both eigensolver drivers give the same evolution") {
  if (!lapack_available()) return;
  FockBasis basis(4);
  auto p = params(0.7, 1.1, 0.2, 0.9);
  std::mt19937_64 rng(13);
  auto x = random_state(basis, rng);
  EvolveOptions lap, eig;
  lap.tail_tol = eig.tail_tol = 2.0;
  lap.driver = EigenDriver::lapack;
  lap.use_cache = false;
  eig.driver = EigenDriver::eigen;
  eig.use_cache = false;
  CHECK(max_amp_diff(evolve(x, p, lap), evolve(x, p, eig)) < 1e-11);
}

TEST_CASE("sector layout matches the truncated occupation count") {
  FockBasis basis(10);
  Evolver ev(basis, params(0.6, 0.8, 0.0, 0.0));
  CHECK(ev.sector_count() == 31);  // totals 0 .. 3 * n_max
  CHECK(ev.max_sector_dim() == 91);
}

TEST_CASE("tail monitoring warns, and strict mode escalates") {
  FockBasis basis(4);
  // heavily loaded probe: most mass sits at the cutoff
  TruncatedState s{basis, std::vector<cplx>(static_cast<size_t>(basis.dim()))};
  s.amplitudes[static_cast<size_t>(basis.index_of(0, 4, 0))] = 1.0;
  std::vector<std::string> warnings;
  EvolveOptions opt;
  opt.warning_sink = &warnings;
  auto out = evolve(s, params(0.6, 0.8, 0.0, 0.4), opt);
  CHECK(!warnings.empty());
  EvolveOptions strict = opt;
  strict.strict = true;
  CHECK_THROWS_AS(evolve(s, params(0.6, 0.8, 0.0, 0.4), strict), TruncationError);
}

TEST_CASE("ensembles validate their weights and evolve member-wise") {
  FockBasis basis(3);
  StateEnsemble ens;
  ens.members.push_back({0.25, basis_state(basis, 0, 0, 0)});
  ens.members.push_back({0.75, basis_state(basis, 0, 1, 0)});
  CHECK_NOTHROW(ens.validate());
  auto p = params(0.6, 0.8, 0.0, 0.7);
  auto out = evolve(ens, p);
  CHECK(out.members.size() == 2);
  CHECK(out.members[0].weight == 0.25);
  auto direct = evolve(ens.members[1].state, p);
  CHECK(max_amp_diff(out.members[1].state, direct) == 0.0);

  StateEnsemble bad;
  bad.members.push_back({0.5, basis_state(basis, 0, 0, 0)});
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  StateEnsemble neg;
  neg.members.push_back({-1.0, basis_state(basis, 0, 0, 0)});
  neg.members.push_back({2.0, basis_state(basis, 0, 1, 0)});
  CHECK_THROWS_AS(neg.validate(), ValidationError);
}

TEST_CASE("expectation values reproduce number statistics exactly") {
  FockBasis basis(5);
  auto two = basis_state(basis, 0, 2, 0);
  LadderOp n_ops[] = {{kProbe, true}, {kProbe, false}};
  CHECK(expectation(two, n_ops).real() == doctest::Approx(2.0).epsilon(1e-15));
  LadderOp m2_ops[] = {{kProbe, true}, {kProbe, true}, {kProbe, false}, {kProbe, false}};
  CHECK(expectation(two, m2_ops).real() == doctest::Approx(2.0).epsilon(1e-15));
  LadderOp cross_ops[] = {{kStokes, true}, {kProbe, false}};
  CHECK(std::abs(expectation(two, cross_ops)) == 0.0);

  StateEnsemble ens;
  ens.members.push_back({0.5, basis_state(basis, 0, 1, 0)});
  ens.members.push_back({0.5, basis_state(basis, 0, 3, 0)});
  CHECK(expectation(ens, n_ops).real() == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("the evolver cache returns shared decompositions") {
  FockBasis basis(4);
  auto p = params(0.5, 0.5, 0.1, 1.0);
  auto a = EvolverCache::global().get(basis, p);
  auto b = EvolverCache::global().get(basis, p);
  CHECK(a.get() == b.get());
  auto p2 = p;
  p2.time = 2.5;  // time is not part of the key
  auto c = EvolverCache::global().get(basis, p2);
  CHECK(a.get() == c.get());
  auto p3 = p;
  p3.g1 = 0.6;
  auto d = EvolverCache::global().get(basis, p3);
  CHECK(a.get() != d.get());
}

TEST_CASE("states serialize to json and back") {
  FockBasis basis(3);
  std::mt19937_64 rng(17);
  auto s = random_state(basis, rng);
  auto j = state_to_json(s);
  auto back = state_from_json(j);
  CHECK(back.basis.n_max() == 3);
  CHECK(max_amp_diff(back, s) == 0.0);
}

TEST_CASE("basis mismatches are rejected") {
  FockBasis small(3), big(4);
  Evolver ev(small, params(0.5, 0.5, 0.0, 0.0));
  auto wrong = basis_state(big, 0, 1, 0);
  CHECK_THROWS_AS(ev.apply(wrong, 0.5, Exec::serial), BasisMismatchError);
}
