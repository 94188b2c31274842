#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "raman/fock.hpp"
#include "raman/statistics.hpp"

namespace raman {

// Coherent amplitudes per mode, storage order (stokes, probe, anti_stokes).
struct CoherentTriple {
  std::array<cplx, 3> alpha{};

  double photon_number() const;  // sum of |alpha_q|^2
};

// Convex combination of coherent product states. This is the computable
// stand-in for a classical (non-negative, regular) P function.
struct CoherentMixture {
  struct Component {
    double weight;
    CoherentTriple point;
  };
  std::vector<Component> components;

  void validate() const;  // weights positive and summing to 1 within 1e-12
};

// Pure output of a probe Fock input |n>: a superposition of |l-m, n-l, m>
// (stokes, probe, anti_stokes occupations) over 0 <= m <= l <= n. The flat
// amplitude index is l (l + 1) / 2 + m.
struct TripartiteFockOutput {
  int n = 0;
  std::vector<cplx> amplitudes;

  cplx amplitude(int l, int m) const;
  static std::array<int, 3> occupations_of(int n, int l, int m);
  double total_weight() const;            // sum |c|^2, equals 1 by unitarity
  std::array<double, 3> occupations() const;  // mean photon number per mode
};

// Coherent in, coherent out: amplitudes transform exactly like the field
// operators, alpha_out = U alpha_in.
CoherentTriple evolve_coherent(const CoherentTriple& in, const PropagatorMatrix& u);

// Closed-form amplitude table of the evolved probe Fock state.
TripartiteFockOutput fock_output(int n, const PropagatorMatrix& u);

// Point-mass P transport: weights unchanged, every point moved by
// evolve_coherent. Classical input stays classical.
CoherentMixture transform_mixture(const CoherentMixture& in, const PropagatorMatrix& u);

// Photon-number distribution of one output mode (binomial in the mode's
// transfer weight).
std::vector<double> marginal_distribution(const TripartiteFockOutput& out, int mode);

// Point mass of the probe P function; sidebands implicitly vacuum.
struct ProbePointMass {
  double weight;
  cplx alpha;
};

// Transported point masses plus a numerical check of the two delta
// constraints that confine the output P to a line through the origin.
struct PReduction {
  CoherentMixture transported;
  std::array<cplx, 3> line_direction{};  // direction of the support line
  std::vector<std::array<double, 2>> delta_residuals;  // per point: (stokes, anti) constraint
  double max_delta_residual = 0.0;
};

PReduction vacuum_sideband_p_reduction(const std::vector<ProbePointMass>& probe_points,
                                       const PropagatorMatrix& u);

enum class Separability { separable, entangled, product };

const char* separability_name(Separability s);

struct WitnessReport {
  Separability verdict = Separability::product;
  // Purity of the reduced state across each (mode | other two) split; only
  // meaningful for pure tripartite outputs.
  std::optional<std::array<double, 3>> bipartition_purity;
  std::optional<CoherentMixture> product_decomposition;  // explicit witness for mixtures
  std::string note;
};

// A coherent mixture is separable by construction; the mixture itself is the
// product decomposition.
WitnessReport separability_witness(const CoherentMixture& mixture);

// Pure-state criterion: mixed marginals certify entanglement. Threshold on
// the purity is 1 - 1e-12.
WitnessReport separability_witness(const TripartiteFockOutput& out);

// Input state menu shared by the CLI and the verification harness. All named
// inputs populate the probe and leave the sidebands in vacuum; mixtures may
// populate all three modes.
struct InputState {
  enum class Kind { vacuum, coherent, fock, squeezed, thermal, mixture };

  Kind kind = Kind::vacuum;
  cplx alpha{};             // coherent amplitude
  int n = 0;                // fock photon number
  double r = 0.0;           // squeezing magnitude
  double theta = 0.0;       // squeezing phase
  int squeezed_cutoff = 8;  // highest Fock level kept in the oracle expansion
  double nbar = 0.0;        // thermal mean photon number
  // Highest Fock level kept in the thermal ensemble; one below the default
  // basis cutoff so no member ever touches the truncation boundary.
  int thermal_cutoff = 9;
  CoherentMixture mixture;

  std::string label() const;
};

// Untruncated moments of the named input. Thermal and squeezed inputs get
// their closed-form moment sequences; the flags select the propagation route.
MomentSet ideal_input_moments(const InputState& in, int n_top = 4);

// Exact moments of a coherent mixture, including the cross number moments.
MomentSet mixture_moments(const CoherentMixture& mix, int n_top = 4);

// Number-basis expansion of squeezed vacuum up to cutoff (odd levels vanish),
// renormalized after truncation. discarded, when given, receives the ideal
// probability mass above the cutoff.
std::vector<cplx> squeezed_fock_amplitudes(double r, double theta, int cutoff,
                                           double* discarded = nullptr);

// Truncated geometric weights of a thermal state, renormalized to sum 1.
std::vector<double> thermal_weights(double nbar, int cutoff, double* discarded = nullptr);

// Normalized truncation of a three-mode coherent product state. discarded,
// when given, receives the ideal probability mass beyond the basis.
fock::TruncatedState coherent_product_state(const fock::FockBasis& basis,
                                            const CoherentTriple& point,
                                            double* discarded = nullptr);

// Weighted-ket encoding of an input state for the brute-force verifier.
// Truncation losses above tail_tol are reported through warnings (or thrown
// in strict mode by the evolution step downstream).
fock::StateEnsemble oracle_input_state(const InputState& in, const fock::FockBasis& basis,
                                       double tail_tol = 1e-10,
                                       std::vector<std::string>* warnings = nullptr);

// Re-encodes the closed-form Fock output on a truncated basis for direct
// amplitude comparison against brute-force evolution.
fock::TruncatedState to_truncated(const TripartiteFockOutput& out, const fock::FockBasis& basis);

// Equal-weight point-mass sample of the thermal P function (a Gaussian of
// variance nbar/2 per quadrature), for the sampling-based demonstrations.
CoherentMixture sample_thermal_mixture(double nbar, int count, std::uint64_t seed);

}  // namespace raman
