#include "raman/config.hpp"

#include <cmath>
#include <cstdio>

namespace raman {

const char* mode_name(int mode) {
  switch (mode) {
    case kStokes:
      return "stokes";
    case kProbe:
      return "probe";
    case kAntiStokes:
      return "anti_stokes";
    default:
      throw ValidationError("mode index out of range: " + std::to_string(mode));
  }
}

std::string format_sig17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double CouplingParams::g_c() const { return std::hypot(g1, gm1); }

double CouplingParams::g() const { return std::hypot(g_c(), delta); }

namespace {

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) {
    throw ValidationError(std::string(field) + " must be finite");
  }
}

void require_positive(double v, const char* field) {
  require_finite(v, field);
  if (v <= 0.0) {
    throw ValidationError(std::string(field) + " must be strictly positive");
  }
}

}  // namespace

void CouplingParams::validate() const {
  require_finite(g1, "g1");
  require_finite(gm1, "gm1");
  require_finite(delta, "delta");
  require_finite(time, "time");
  if (g1 < 0.0) throw ValidationError("g1 must be >= 0");
  if (gm1 < 0.0) throw ValidationError("gm1 must be >= 0");
  if (time < 0.0) throw ValidationError("time must be >= 0");
  if (g1 == 0.0 && gm1 == 0.0) {
    throw DegenerateCouplingError("both couplings vanish; no sideband beating possible");
  }
}

void append_validity_warning(const CouplingParams& p, std::vector<std::string>* warnings) {
  if (warnings == nullptr) return;
  const double gt = p.g() * p.time;
  if (gt > 0.5) {
    warnings->push_back("g*t = " + format_sig17(gt) +
                        " exceeds 0.5; the single-sideband-pair model assumes g*t small "
                        "compared to unity");
  }
}

// Where the reduced constants come from. The medium holds number_density
// molecules per volume with a prepared two-level coherence of magnitude
// coherence_magnitude; the three carriers sit one transition frequency
// apart. A field beating against the coherence sources its neighbouring
// sideband, so in the slowly-varying envelope picture each carrier pair
// (probe, q) exchanges photons at the rate
//
//   g_q = (number_density * hbar / epsilon0) * coherence_magnitude
//         * sqrt(omega_q * omega_probe) * d_q,
//
// with d_q the field-pair coupling element (coupling_probe for the
// anti-Stokes pair, coupling_stokes for the Stokes pair). The per-carrier
// dispersive response shifts each wave vector by kappa_q = number_density *
// hbar * omega_q * dispersion_q / (epsilon0 * c); what detunes the exchange
// is only the residual three-wave mismatch delta_k = 2 kappa_probe -
// kappa_anti - kappa_stokes, entering the co-moving frame as delta = c *
// delta_k / 4. A medium of length L traversed at c interacts for time L / c.
// The coherence phase rotates the sideband operators by a fixed angle and
// cancels in every statistic computed downstream; it is exposed on the
// derivation result but does not feed the dynamics.
CouplingDerivation derive_couplings(const PhysicalConfig& cfg, bool strict) {
  require_positive(cfg.number_density, "number_density");
  require_positive(cfg.hbar, "hbar");
  require_positive(cfg.epsilon0, "epsilon0");
  require_positive(cfg.light_speed, "light_speed");
  require_positive(cfg.omega_stokes, "omega_stokes");
  require_positive(cfg.omega_probe, "omega_probe");
  require_positive(cfg.omega_anti, "omega_anti");
  if (!(cfg.omega_anti > cfg.omega_probe && cfg.omega_probe > cfg.omega_stokes)) {
    throw ValidationError("carrier ordering violated: need omega_anti > omega_probe > omega_stokes");
  }
  require_positive(cfg.length, "length");
  require_finite(cfg.dispersion_stokes, "dispersion_stokes");
  require_finite(cfg.dispersion_probe, "dispersion_probe");
  require_finite(cfg.dispersion_anti, "dispersion_anti");
  require_finite(cfg.coupling_probe, "coupling_probe");
  require_finite(cfg.coupling_stokes, "coupling_stokes");
  require_finite(cfg.coherence_phase, "coherence_phase");
  require_finite(cfg.coherence_magnitude, "coherence_magnitude");
  if (cfg.coherence_magnitude < 0.0) {
    throw ValidationError("coherence_magnitude must be >= 0");
  }

  CouplingDerivation out;
  if (cfg.coherence_magnitude > 0.5) {
    const std::string msg = "coherence_magnitude = " + format_sig17(cfg.coherence_magnitude) +
                            " exceeds the two-level bound 0.5";
    if (strict) throw ValidationError(msg);
    out.warnings.push_back(msg);
  }

  const double pref = cfg.number_density * cfg.hbar / cfg.epsilon0 * cfg.coherence_magnitude;
  CouplingParams p;
  p.g1 = pref * std::sqrt(cfg.omega_anti * cfg.omega_probe) * cfg.coupling_probe;
  p.gm1 = pref * std::sqrt(cfg.omega_stokes * cfg.omega_probe) * cfg.coupling_stokes;

  double delta_k = 0.0;
  if (cfg.phase_mismatch_override.has_value()) {
    delta_k = *cfg.phase_mismatch_override;
    require_finite(delta_k, "phase_mismatch_override");
  } else {
    const double beta_scale = cfg.number_density * cfg.hbar / (cfg.epsilon0 * cfg.light_speed);
    const double kappa_stokes = beta_scale * cfg.omega_stokes * cfg.dispersion_stokes;
    const double kappa_probe = beta_scale * cfg.omega_probe * cfg.dispersion_probe;
    const double kappa_anti = beta_scale * cfg.omega_anti * cfg.dispersion_anti;
    delta_k = 2.0 * kappa_probe - kappa_anti - kappa_stokes;
  }
  p.delta = cfg.light_speed * delta_k / 4.0;
  p.time = cfg.length / cfg.light_speed;

  p.validate();
  append_validity_warning(p, &out.warnings);

  out.params = p;
  out.coherence_phase = cfg.coherence_phase;
  out.phase_mismatch = delta_k;
  return out;
}

CouplingDerivation ParameterDocument::resolve(bool strict) const {
  if (physical.has_value() == reduced.has_value()) {
    throw ValidationError("parameter document must contain exactly one of 'physical' or 'reduced'");
  }
  if (physical.has_value()) return derive_couplings(*physical, strict);
  CouplingDerivation out;
  reduced->validate();
  out.params = *reduced;
  append_validity_warning(out.params, &out.warnings);
  return out;
}

namespace {

double number_field(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key)) {
    throw ValidationError(std::string("missing field '") + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw ValidationError(std::string("field '") + key + "' must be a number");
  }
  return v.get<double>();
}

double number_field_or(const nlohmann::json& obj, const char* key, double fallback) {
  return obj.contains(key) ? number_field(obj, key) : fallback;
}

}  // namespace

ParameterDocument parse_parameters(const nlohmann::json& doc) {
  ParameterDocument out;
  const bool has_physical = doc.contains("physical");
  const bool has_reduced = doc.contains("reduced");
  if (has_physical == has_reduced) {
    throw ValidationError("configuration must contain exactly one of 'physical' or 'reduced'");
  }

  if (has_reduced) {
    const auto& r = doc.at("reduced");
    CouplingParams p;
    p.g1 = number_field(r, "g1");
    p.gm1 = number_field(r, "gm1");
    p.delta = number_field_or(r, "delta", 0.0);
    p.time = number_field(r, "time");
    out.reduced = p;
    return out;
  }

  const auto& ph = doc.at("physical");
  PhysicalConfig cfg;
  cfg.number_density = number_field_or(ph, "number_density", 1.0);
  cfg.hbar = number_field_or(ph, "hbar", 1.0);
  cfg.epsilon0 = number_field_or(ph, "epsilon0", 1.0);
  cfg.light_speed = number_field_or(ph, "light_speed", 1.0);
  cfg.omega_stokes = number_field(ph, "omega_stokes");
  cfg.omega_probe = number_field(ph, "omega_probe");
  cfg.omega_anti = number_field(ph, "omega_anti");
  cfg.dispersion_stokes = number_field_or(ph, "dispersion_stokes", 0.0);
  cfg.dispersion_probe = number_field_or(ph, "dispersion_probe", 0.0);
  cfg.dispersion_anti = number_field_or(ph, "dispersion_anti", 0.0);
  cfg.coupling_probe = number_field(ph, "coupling_probe");
  cfg.coupling_stokes = number_field(ph, "coupling_stokes");
  cfg.coherence_magnitude = number_field(ph, "coherence_magnitude");
  cfg.coherence_phase = number_field_or(ph, "coherence_phase", 0.0);
  cfg.length = number_field(ph, "length");
  if (ph.contains("phase_mismatch")) {
    cfg.phase_mismatch_override = number_field(ph, "phase_mismatch");
  }
  out.physical = cfg;
  return out;
}

nlohmann::json to_json(const CouplingParams& p) {
  return nlohmann::json{{"g1", p.g1},
                        {"gm1", p.gm1},
                        {"delta", p.delta},
                        {"time", p.time},
                        {"g_c", p.g_c()},
                        {"g", p.g()},
                        {"gt", p.g() * p.time}};
}

nlohmann::json to_json(const PhysicalConfig& cfg) {
  nlohmann::json j{{"number_density", cfg.number_density},
                   {"hbar", cfg.hbar},
                   {"epsilon0", cfg.epsilon0},
                   {"light_speed", cfg.light_speed},
                   {"omega_stokes", cfg.omega_stokes},
                   {"omega_probe", cfg.omega_probe},
                   {"omega_anti", cfg.omega_anti},
                   {"dispersion_stokes", cfg.dispersion_stokes},
                   {"dispersion_probe", cfg.dispersion_probe},
                   {"dispersion_anti", cfg.dispersion_anti},
                   {"coupling_probe", cfg.coupling_probe},
                   {"coupling_stokes", cfg.coupling_stokes},
                   {"coherence_magnitude", cfg.coherence_magnitude},
                   {"coherence_phase", cfg.coherence_phase},
                   {"length", cfg.length}};
  if (cfg.phase_mismatch_override.has_value()) {
    j["phase_mismatch"] = *cfg.phase_mismatch_override;
  }
  return j;
}

}  // namespace raman
