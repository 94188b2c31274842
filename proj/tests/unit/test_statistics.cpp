#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "raman/statistics.hpp"
#include "raman/states.hpp"

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

CouplingParams canonical() { return params(0.6, 0.8, 0.0, kPi / 2.0); }

InputState fock_in(int n) {
  InputState s;
  s.kind = InputState::Kind::fock;
  s.n = n;
  return s;
}

InputState coherent_in(cplx a) {
  InputState s;
  s.kind = InputState::Kind::coherent;
  s.alpha = a;
  return s;
}

InputState squeezed_in(double r, double theta) {
  InputState s;
  s.kind = InputState::Kind::squeezed;
  s.r = r;
  s.theta = theta;
  return s;
}

InputState thermal_in(double nbar) {
  InputState s;
  s.kind = InputState::Kind::thermal;
  s.nbar = nbar;
  return s;
}

}  // namespace

TEST_CASE("transfer weights take their known values and always sum to one") {
  auto w = transfer_weights(canonical());
  CHECK(w[kStokes] == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(w[kProbe] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(w[kAntiStokes] == doctest::Approx(0.36).epsilon(1e-14));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> cc(0.01, 2.0), dd(-2.0, 2.0), tt(0.0, kPi);
  for (int i = 0; i < 100; ++i) {
    auto p = params(cc(rng), cc(rng), dd(rng), tt(rng));
    auto t = transfer_weights(p);
    CHECK(t[0] + t[1] + t[2] == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : t) CHECK(v >= 0.0);
  }
}

TEST_CASE("a probe coherent amplitude moves along the matrix column") {
  auto m_in = ideal_input_moments(coherent_in(0.5));
  auto out = propagate_moments(m_in, build_propagator(canonical()));
  CHECK(std::abs(out.first[kStokes] - cplx(0.0, 0.4)) < 1e-14);
  CHECK(std::abs(out.first[kProbe]) < 1e-14);
  CHECK(std::abs(out.first[kAntiStokes] - cplx(0.0, 0.3)) < 1e-14);
  CHECK(out.total_occupation() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_NOTHROW(out.validate());
}

TEST_CASE("two probe photons spread with the transfer weights") {
  auto m_in = ideal_input_moments(fock_in(2));
  auto u = build_propagator(canonical());
  auto out = propagate_moments(m_in, u);
  CHECK(out.occupation(kStokes) == doctest::Approx(1.28).epsilon(1e-13));
  CHECK(out.occupation(kProbe) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
  CHECK(out.occupation(kAntiStokes) == doctest::Approx(0.72).epsilon(1e-13));
  CHECK(out.number_moment(kStokes, 2) == doctest::Approx(2.0 * 0.64 * 0.64).epsilon(1e-12));
  CHECK(out.number_moment(kAntiStokes, 2) == doctest::Approx(2.0 * 0.36 * 0.36).epsilon(1e-12));
  CHECK(out.cross_number_moment(kStokes, kAntiStokes) ==
        doctest::Approx(2.0 * 0.64 * 0.36).epsilon(1e-12));
  CHECK(mode_autocorrelation(out, kStokes, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pair_cross_correlation(out, kStokes, kAntiStokes) == doctest::Approx(0.5).epsilon(1e-12));
  auto direct = photon_moments_vacuum_sidebands(m_in.number[kProbe], canonical(), 2);
  CHECK(direct[kStokes] == doctest::Approx(2.0 * 0.64 * 0.64).epsilon(1e-13));
}

TEST_CASE("normalized autocorrelations carry the documented constants") {
  CHECK(autocorrelation(ideal_input_moments(fock_in(2)).number[kProbe], 2).value ==
        doctest::Approx(0.5).epsilon(1e-15));
  auto fock4 = ideal_input_moments(fock_in(4)).number[kProbe];
  CHECK(autocorrelation(fock4, 2).value == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(autocorrelation(fock4, 3).value == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(autocorrelation(fock4, 4).value == doctest::Approx(0.09375).epsilon(1e-15));
  auto coh = ideal_input_moments(coherent_in(cplx(0.3, 0.4))).number[kProbe];
  for (int order = 2; order <= 4; ++order) {
    CHECK(autocorrelation(coh, order).value == doctest::Approx(1.0).epsilon(1e-13));
  }
  auto th = ideal_input_moments(thermal_in(0.7)).number[kProbe];
  CHECK(autocorrelation(th, 2).value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(autocorrelation(th, 3).value == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(autocorrelation(th, 4).value == doctest::Approx(24.0).epsilon(1e-12));
  CHECK(cross_correlation(th).value == autocorrelation(th, 2).value);
  CHECK(cross_correlation(th).order == 2);
}

TEST_CASE("correlations of an empty mode are refused") {
  std::vector<double> empty_moments = {0.0, 0.0};
  CHECK_THROWS_AS(autocorrelation(empty_moments, 2), UndefinedCorrelationError);
  auto out = propagate_moments(ideal_input_moments(fock_in(2)),
                               build_propagator(params(0.6, 0.8, 0.0, 0.0)));
  // nothing has scattered into the sidebands yet
  CHECK_THROWS_AS(mode_autocorrelation(out, kStokes, 2), UndefinedCorrelationError);
}

TEST_CASE("moment orders outside the tracked range are refused") {
  auto m = ideal_input_moments(fock_in(2), 2);
  CHECK_THROWS_AS(m.number_moment(kProbe, 3), UnsupportedMomentError);
  CHECK_THROWS_AS(autocorrelation(m.number[kProbe], 3), UnsupportedMomentError);
  // a bare second-moment set supports no transfer of higher number moments
  MomentSet plain;
  plain.first[kProbe] = 0.1;
  plain.hermitian[kProbe][kProbe] = 0.01;
  plain.pair[kProbe][kProbe] = 0.01;
  plain.number[kProbe] = {0.01};
  auto out = propagate_moments(plain, build_propagator(canonical()));
  CHECK_THROWS_AS(out.number_moment(kStokes, 2), UnsupportedMomentError);
}

TEST_CASE("transfer-law and contraction routes agree for a gaussian input") {
  auto m_both = ideal_input_moments(squeezed_in(0.3, 0.7));
  auto via_transfer = m_both;
  via_transfer.gaussian = false;  // leaves only the transfer-law route
  auto via_wick = m_both;
  via_wick.vacuum_sidebands = false;  // leaves only the contraction route
  auto u = build_propagator(params(0.6, 0.8, 0.4, 0.9));
  auto a = propagate_moments(via_transfer, u);
  auto b = propagate_moments(via_wick, u);
  for (int q = 0; q < kModeCount; ++q) {
    for (int order = 1; order <= 4; ++order) {
      CHECK(a.number_moment(q, order) ==
            doctest::Approx(b.number_moment(q, order)).epsilon(1e-11));
    }
    for (int s = q + 1; s < kModeCount; ++s) {
      CHECK(a.cross_number_moment(q, s) ==
            doctest::Approx(b.cross_number_moment(q, s)).epsilon(1e-11));
    }
  }
}

TEST_CASE("contraction rules reproduce the closed zero-mean moments") {
  double nu = 0.3;
  cplx sigma(0.1, 0.2);
  Mat3 herm{};
  Mat3 pair{};
  herm[kProbe][kProbe] = nu;
  pair[kProbe][kProbe] = sigma;
  std::array<cplx, 3> mean{};
  auto moment = [&](int order) {
    std::vector<GaussianLeg> legs;
    for (int i = 0; i < order; ++i) legs.push_back({kProbe, true});
    for (int i = 0; i < order; ++i) legs.push_back({kProbe, false});
    return gaussian_normal_moment(legs, mean, herm, pair).real();
  };
  double s2 = std::norm(sigma);
  CHECK(moment(1) == doctest::Approx(nu).epsilon(1e-15));
  CHECK(moment(2) == doctest::Approx(2 * nu * nu + s2).epsilon(1e-14));
  CHECK(moment(3) == doctest::Approx(6 * nu * nu * nu + 9 * nu * s2).epsilon(1e-14));
  CHECK(moment(4) == doctest::Approx(24 * std::pow(nu, 4) + 72 * nu * nu * s2 + 9 * s2 * s2)
                         .epsilon(1e-14));
}

TEST_CASE("contraction rules include the mean field") {
  cplx alpha(0.4, -0.3);
  std::array<cplx, 3> mean{};
  mean[kProbe] = alpha;
  Mat3 zero{};
  GaussianLeg legs[] = {{kProbe, true}, {kProbe, true}, {kProbe, false}, {kProbe, false}};
  auto m2 = gaussian_normal_moment(legs, mean, zero, zero);
  CHECK(std::abs(m2 - cplx(std::pow(std::norm(alpha), 2), 0.0)) < 1e-14);
  GaussianLeg bad_order[] = {{kProbe, false}, {kProbe, true}};
  CHECK_THROWS_AS(gaussian_normal_moment(bad_order, mean, zero, zero), ValidationError);
}

TEST_CASE("inconsistent moment sets fail validation") {
  MomentSet m = ideal_input_moments(coherent_in(0.5));
  m.hermitian[kStokes][kProbe] = cplx(0.2, 0.0);  // breaks hermiticity against its mirror
  CHECK_THROWS_AS(m.validate(), ValidationError);
  MomentSet neg = ideal_input_moments(coherent_in(0.5));
  neg.hermitian[kStokes][kStokes] = -0.5;  // negative occupation
  CHECK_THROWS_AS(neg.validate(), ValidationError);
  MomentSet cs = ideal_input_moments(coherent_in(0.5));
  cs.pair[kProbe][kProbe] = cplx(5.0, 0.0);  // second moment beyond any physical bound
  CHECK_THROWS_AS(cs.validate(), ValidationError);
}

TEST_CASE("the quadrature spread follows its closed form") {
  double r = 0.3;
  ProbeQuadratureMoments q;
  q.mean = 0.0;
  q.second = -std::sinh(r) * std::cosh(r);
  q.occupation = std::sinh(r) * std::sinh(r);
  CHECK(squeezing_value(q, 0.0) == doctest::Approx(std::expm1(-2.0 * r)).epsilon(1e-13));
  CHECK(squeezing_value(q, kPi / 2.0) == doctest::Approx(std::expm1(2.0 * r)).epsilon(1e-13));
  // a displaced state with no fluctuations has the vacuum spread
  ProbeQuadratureMoments coh;
  coh.mean = cplx(0.3, 0.1);
  coh.second = coh.mean * coh.mean;
  coh.occupation = std::norm(coh.mean);
  CHECK(squeezing_value(coh, 0.7) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
}

TEST_CASE("squeezing moves to the sidebands with the transfer weights") {
  double r = 0.3;
  ProbeQuadratureMoments q;
  q.mean = 0.0;
  q.second = -std::sinh(r) * std::cosh(r);
  q.occupation = std::sinh(r) * std::sinh(r);
  auto rep = squeezing_transfer(q, canonical());
  CHECK(rep.curves[kStokes].phase.size() == 720);
  CHECK(rep.curves[kStokes].phase[0] == 0.0);
  CHECK(rep.curves[kStokes].phase[1] == doctest::Approx(kPi / 720.0).epsilon(1e-15));
  CHECK(rep.transfer[kStokes] == doctest::Approx(0.64).epsilon(1e-13));
  double floor = std::expm1(-2.0 * r);
  CHECK(rep.curves[kStokes].min_value == doctest::Approx(0.64 * floor).epsilon(1e-10));
  CHECK(rep.curves[kAntiStokes].min_value == doctest::Approx(0.36 * floor).epsilon(1e-10));
  CHECK(rep.curves[kStokes].min_phase == doctest::Approx(kPi / 2.0).epsilon(1e-9));
  CHECK(rep.curves[kStokes].closed_form_min == doctest::Approx(0.64 * floor).epsilon(1e-12));
  CHECK(rep.curves[kStokes].closed_form_phase == doctest::Approx(kPi / 2.0).epsilon(1e-12));
  CHECK(rep.curves[kStokes].min_value <= rep.curves[kStokes].closed_form_min + 1e-12);
  CHECK(rep.route_residual < 1e-10);
  CHECK(rep.relation_residual < 1e-10);
  CHECK(rep.occupation[kStokes] == doctest::Approx(0.64 * q.occupation).epsilon(1e-12));
  // the probe is empty at full conversion: no normalized curve there
  CHECK(!rep.normalized_defined[kProbe]);
  CHECK(rep.normalized_defined[kStokes]);
  CHECK_THROWS_AS(rep.normalized_curve(kProbe), UndefinedNormalizationError);
  CHECK(rep.normalized_curve(kStokes).size() == 720);
}

TEST_CASE("coherent input leaves no sideband squeezing") {
  ProbeQuadratureMoments q;
  q.mean = cplx(0.5, 0.0);
  q.second = q.mean * q.mean;
  q.occupation = std::norm(q.mean);
  auto rep = squeezing_transfer(q, params(0.6, 0.8, 0.3, 0.9));
  for (int mode : {kStokes, kAntiStokes}) {
    for (double v : rep.curves[mode].value) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("thermal input keeps a flat positive spread everywhere") {
  ProbeQuadratureMoments q;
  q.mean = 0.0;
  q.second = 0.0;
  q.occupation = 0.4;
  auto rep = squeezing_transfer(q, params(0.6, 0.8, 0.2, 0.7));
  auto w = transfer_weights(params(0.6, 0.8, 0.2, 0.7));
  for (int mode = 0; mode < kModeCount; ++mode) {
    for (double v : rep.curves[mode].value) {
      CHECK(v == doctest::Approx(2.0 * 0.4 * w[mode]).epsilon(1e-11));
    }
  }
}

TEST_CASE("unphysical quadrature inputs are rejected") {
  ProbeQuadratureMoments bad;
  bad.mean = 0.0;
  bad.second = 5.0;  // |<b^2>| far beyond the occupation bound
  bad.occupation = 0.1;
  CHECK_THROWS_AS(squeezing_transfer(bad, canonical()), ValidationError);
  ProbeQuadratureMoments neg;
  neg.mean = 0.0;
  neg.second = 0.0;
  neg.occupation = -0.2;
  CHECK_THROWS_AS(squeezing_transfer(neg, canonical()), ValidationError);
}
