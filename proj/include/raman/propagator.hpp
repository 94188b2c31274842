#pragma once

#include <array>

#include "raman/config.hpp"

namespace raman {

using Mat3 = std::array<std::array<cplx, 3>, 3>;

// Closed-form 3x3 mode rotation: b_out = U b_in, rows/columns in storage order
// (stokes, probe, anti_stokes). Unitary for every valid parameter set.
struct PropagatorMatrix {
  Mat3 u{};
  CouplingParams params{};

  cplx operator()(int row, int col) const { return u[row][col]; }
  double unitarity_defect() const;  // max |(U^dag U - I)_ij|
};

// Sideband superpositions that decouple the dynamics. Weight pairs are over
// (anti_stokes, stokes); normal-mode rows are over (probe, coupled).
struct ModeDecomposition {
  std::array<double, 2> coupled_weights{};
  std::array<double, 2> uncoupled_weights{};
  std::array<std::array<double, 2>, 2> normal_weights{};  // rows: plus, minus
  std::array<double, 3> frequencies{};                    // (uncoupled, plus, minus)
};

PropagatorMatrix build_propagator(const CouplingParams& p);

ModeDecomposition decompose_modes(const CouplingParams& p);

// Reconstructs U by conjugating the diagonal phase evolution of the
// (uncoupled, plus, minus) modes back through the basis change. Agrees with
// build_propagator entrywise to machine precision.
PropagatorMatrix propagator_via_modes(const CouplingParams& p);

// Hermitian coefficient matrix h of the quadratic generator, so that
// U(t) = exp(-i h t). Diagonal (delta, -delta, delta), probe-sideband
// couplings -gm1 and -g1, no direct sideband-sideband coupling.
std::array<std::array<double, 3>, 3> hamiltonian_spec(const CouplingParams& p);

// Third construction route: eigendecomposition of hamiltonian_spec.
PropagatorMatrix propagator_via_hamiltonian(const CouplingParams& p);

// Phase reference used by the squeezing transfer: the argument of the
// probe->probe entry. Branch-safe, unlike the arctan form.
double reference_phase(const PropagatorMatrix& u);

// sin(g t)/g, switching to a series for g*t < 1e-8 so couplings and detuning
// can be swept through zero.
double sinc_gt(double g, double t);
double sinc_gt_series(double g, double t);  // exposed for the branch cross-check

}  // namespace raman
