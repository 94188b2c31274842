#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "raman/common.hpp"

namespace raman {

// Raw physical description of the medium and the three carriers. Units are
// the caller's business as long as they are consistent; the defaults assume
// natural units hbar = epsilon0 = c = 1.
struct PhysicalConfig {
  double number_density = 1.0;
  double hbar = 1.0;
  double epsilon0 = 1.0;
  double light_speed = 1.0;
  double omega_stokes = 0.0;
  double omega_probe = 0.0;
  double omega_anti = 0.0;
  double dispersion_stokes = 0.0;
  double dispersion_probe = 0.0;
  double dispersion_anti = 0.0;
  // d_0 drives the probe <-> anti-Stokes exchange, d_{-1} the probe <-> Stokes one.
  double coupling_probe = 0.0;
  double coupling_stokes = 0.0;
  double coherence_magnitude = 0.0;
  double coherence_phase = 0.0;
  double length = 0.0;
  std::optional<double> phase_mismatch_override;
};

// Reduced dynamical parameters; everything downstream depends only on these.
struct CouplingParams {
  double g1 = 0.0;     // probe <-> anti-Stokes coupling rate
  double gm1 = 0.0;    // probe <-> Stokes coupling rate
  double delta = 0.0;  // phase-mismatch detuning
  double time = 0.0;   // interaction time (medium length / c)

  double g_c() const;  // sqrt(g1^2 + gm1^2)
  double g() const;    // sqrt(g_c^2 + delta^2)

  // Throws ValidationError naming the offending field; both couplings zero is
  // a DegenerateCouplingError (no beating possible).
  void validate() const;
};

struct CouplingDerivation {
  CouplingParams params;
  double coherence_phase = 0.0;
  double phase_mismatch = 0.0;  // the wave-vector mismatch actually used
  std::vector<std::string> warnings;
};

// Reduction of the physical description to (g1, gm1, delta, time). The
// coherence bound 0.5 and the g*t validity bound produce warnings; in strict
// mode the coherence bound becomes an error.
CouplingDerivation derive_couplings(const PhysicalConfig& cfg, bool strict = false);

// Appends the g*t > 0.5 validity warning when applicable.
void append_validity_warning(const CouplingParams& p, std::vector<std::string>* warnings);

// Parameter document with exactly one of the two blocks present.
struct ParameterDocument {
  std::optional<PhysicalConfig> physical;
  std::optional<CouplingParams> reduced;

  CouplingDerivation resolve(bool strict = false) const;
};

ParameterDocument parse_parameters(const nlohmann::json& doc);

nlohmann::json to_json(const CouplingParams& p);
nlohmann::json to_json(const PhysicalConfig& cfg);

}  // namespace raman
