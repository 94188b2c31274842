#pragma once

#include <optional>
#include <span>
#include <vector>

#include "raman/propagator.hpp"

namespace raman {

// First and second moments over the three modes, plus per-mode normally
// ordered number moments <b^dag^n b^n> up to n_top where the input class
// supports them. The two flags describe the *input* state class:
// vacuum_sidebands enables the transfer closed forms for number moments of
// any probe state, gaussian enables Wick evaluation. After propagation the
// flags describe the output state (vacuum_sidebands drops, gaussian survives).
struct MomentSet {
  int n_top = 4;
  std::array<cplx, 3> first{};
  Mat3 pair{};       // <b_q b_r>, symmetric
  Mat3 hermitian{};  // <b_q^dag b_r>
  std::array<std::vector<double>, 3> number;  // [mode][n-1] = <b^dag^n b^n>; may be shorter than n_top
  std::optional<std::array<std::array<double, 3>, 3>> cross_number;  // <n_k n_l>, k != l
  bool vacuum_sidebands = false;
  bool gaussian = false;

  double occupation(int mode) const;  // <b^dag b>
  double total_occupation() const;
  bool has_number_moment(int mode, int order) const;
  double number_moment(int mode, int order) const;  // throws UnsupportedMomentError when absent
  double cross_number_moment(int k, int l) const;

  // Positivity, Hermiticity, Cauchy-Schwarz and internal consistency checks.
  void validate(double tol = 1e-9) const;
};

// Pushes every tracked moment through the mode rotation. Number moments of
// order >= 2 come from the transfer closed forms (vacuum-sideband inputs) or
// from Wick contractions (gaussian inputs); otherwise they are left
// unavailable and the accessors throw.
MomentSet propagate_moments(const MomentSet& input, const PropagatorMatrix& u);

// Transfer weights (T_stokes, T_probe, T_anti): the squared magnitudes of the
// probe column, written in their trigonometric closed form.
std::array<double, 3> transfer_weights(const CouplingParams& p);

// Per-mode number moments of order n for a probe input with vacuum sidebands:
// out_q = T_q^n * m_n.
std::array<double, 3> photon_moments_vacuum_sidebands(const std::vector<double>& probe_number_moments,
                                                      const CouplingParams& p, int order);

// Normalized autocorrelation of given order. The value is shared by all three
// output modes and is independent of the propagation parameters, so a single
// tagged value is returned.
struct SharedCorrelation {
  double value;
  int order;
};

SharedCorrelation autocorrelation(const std::vector<double>& probe_number_moments, int order);

// The three pairwise cross-correlations coincide with autocorrelation order 2.
SharedCorrelation cross_correlation(const std::vector<double>& probe_number_moments);

// Per-mode g^(n) read off a propagated MomentSet; used to check the shared
// value numerically.
double mode_autocorrelation(const MomentSet& propagated, int mode, int order);
double pair_cross_correlation(const MomentSet& propagated, int k, int l);

// Normally ordered moment of a Gaussian state with the given mean and
// centered second moments, by Wick contraction. Operators must be listed with
// every daggered factor before every undaggered one.
struct GaussianLeg {
  int mode;
  bool dagger;
};
cplx gaussian_normal_moment(std::span<const GaussianLeg> legs, const std::array<cplx, 3>& mean,
                            const Mat3& centered_hermitian, const Mat3& centered_pair);

// Probe-mode quadrature data: <b>, <b^2>, <b^dag b>.
struct ProbeQuadratureMoments {
  cplx mean{};
  cplx second{};
  double occupation = 0.0;
};

// S(phi) = 2 nu + 2 Re(sigma e^{-2 i phi}) with centered nu, sigma.
double squeezing_value(const ProbeQuadratureMoments& m, double phi);

struct SqueezingCurve {
  std::vector<double> phase;  // grid on [0, pi)
  std::vector<double> value;
  double min_value = 0.0;
  double min_phase = 0.0;
  double closed_form_min = 0.0;
  double closed_form_phase = 0.0;
};

struct SqueezingReport {
  std::array<SqueezingCurve, 3> curves;
  std::array<double, 3> occupation{};  // output <n_q>
  std::array<double, 3> transfer{};    // T_q
  double reference_phase = 0.0;        // arg of the probe->probe entry
  std::array<bool, 3> normalized_defined{};
  std::array<std::vector<double>, 3> normalized;  // s_q on the grid where defined
  // Worst mismatch between the transfer-law curves and the curves recomputed
  // from the propagated output moments (an independent route).
  double route_residual = 0.0;
  // Worst violation of the shift identities s_{+1}(phi + pi/2) =
  // s_{-1}(phi + pi/2) = s_probe(phi + phi_L) = s_in(phi), evaluated through
  // the output-moment route on modes with non-negligible transfer.
  double relation_residual = 0.0;

  const std::vector<double>& normalized_curve(int mode) const;
};

// Output squeezing curves: the probe curve is the input one attenuated and
// rotated by the reference phase; the sideband curves are the input one
// scaled by the transfer weights and shifted by pi/2. Throws
// VerificationError if the two internal routes disagree beyond rounding.
SqueezingReport squeezing_transfer(const ProbeQuadratureMoments& input, const CouplingParams& p,
                                   int phi_points = 720);

}  // namespace raman
