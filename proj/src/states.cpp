#include "raman/states.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace raman {
namespace {

cplx ipow(cplx base, int exponent) {
  cplx out(1.0, 0.0);
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out *= static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

void check_weights(const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ValidationError("mixture weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("mixture weights must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

}  // namespace

double CoherentTriple::photon_number() const {
  return std::norm(alpha[0]) + std::norm(alpha[1]) + std::norm(alpha[2]);
}

void CoherentMixture::validate() const {
  if (components.empty()) throw ValidationError("mixture needs at least one component");
  std::vector<double> w;
  w.reserve(components.size());
  for (const auto& c : components) w.push_back(c.weight);
  check_weights(w);
}

cplx TripartiteFockOutput::amplitude(int l, int m) const {
  if (l < 0 || l > n || m < 0 || m > l) throw ValidationError("amplitude index out of range");
  return amplitudes[static_cast<size_t>(l) * (l + 1) / 2 + m];
}

std::array<int, 3> TripartiteFockOutput::occupations_of(int n, int l, int m) {
  return {l - m, n - l, m};
}

double TripartiteFockOutput::total_weight() const {
  double sum = 0.0;
  for (const cplx& c : amplitudes) sum += std::norm(c);
  return sum;
}

std::array<double, 3> TripartiteFockOutput::occupations() const {
  std::array<double, 3> occ{};
  for (int l = 0; l <= n; ++l) {
    for (int m = 0; m <= l; ++m) {
      double p = std::norm(amplitude(l, m));
      auto ns = occupations_of(n, l, m);
      for (int q = 0; q < kModeCount; ++q) occ[q] += p * ns[q];
    }
  }
  return occ;
}

CoherentTriple evolve_coherent(const CoherentTriple& in, const PropagatorMatrix& u) {
  CoherentTriple out;
  for (int q = 0; q < kModeCount; ++q) {
    cplx a{};
    for (int r = 0; r < kModeCount; ++r) a += u(q, r) * in.alpha[r];
    out.alpha[q] = a;
  }
  return out;
}

TripartiteFockOutput fock_output(int n, const PropagatorMatrix& u) {
  if (n < 0) throw ValidationError("photon number must be non-negative");
  TripartiteFockOutput out;
  out.n = n;
  out.amplitudes.resize(static_cast<size_t>(n + 1) * (n + 2) / 2);
  cplx to_stokes = u(kProbe, kStokes);
  cplx stay = u(kProbe, kProbe);
  cplx to_anti = u(kProbe, kAntiStokes);
  size_t idx = 0;
  for (int l = 0; l <= n; ++l) {
    for (int m = 0; m <= l; ++m) {
      double weight = std::sqrt(binomial(n, l) * binomial(l, m));
      out.amplitudes[idx++] =
          weight * ipow(to_stokes, l - m) * ipow(stay, n - l) * ipow(to_anti, m);
    }
  }
  return out;
}

CoherentMixture transform_mixture(const CoherentMixture& in, const PropagatorMatrix& u) {
  in.validate();
  CoherentMixture out;
  out.components.reserve(in.components.size());
  for (const auto& c : in.components) {
    out.components.push_back({c.weight, evolve_coherent(c.point, u)});
  }
  return out;
}

std::vector<double> marginal_distribution(const TripartiteFockOutput& out, int mode) {
  if (mode < 0 || mode >= kModeCount) throw ValidationError("mode index out of range");
  std::vector<double> dist(static_cast<size_t>(out.n) + 1, 0.0);
  for (int l = 0; l <= out.n; ++l) {
    for (int m = 0; m <= l; ++m) {
      auto ns = TripartiteFockOutput::occupations_of(out.n, l, m);
      dist[static_cast<size_t>(ns[mode])] += std::norm(out.amplitude(l, m));
    }
  }
  return dist;
}

PReduction vacuum_sideband_p_reduction(const std::vector<ProbePointMass>& probe_points,
                                       const PropagatorMatrix& u) {
  std::vector<double> w;
  w.reserve(probe_points.size());
  for (const auto& p : probe_points) w.push_back(p.weight);
  if (w.empty()) throw ValidationError("probe support needs at least one point");
  check_weights(w);

  PReduction red;
  red.line_direction = {u(kProbe, kStokes), u(kProbe, kProbe), u(kProbe, kAntiStokes)};
  red.transported.components.reserve(probe_points.size());
  red.delta_residuals.reserve(probe_points.size());
  for (const auto& p : probe_points) {
    CoherentTriple in;
    in.alpha[kProbe] = p.alpha;
    CoherentTriple moved = evolve_coherent(in, u);
    red.transported.components.push_back({p.weight, moved});
    // The output P factorizes into delta functions that pin the combinations
    // sum_q conj(u_{sideband,q}) beta_q to zero; row orthogonality of the
    // rotation makes the transported points satisfy both automatically.
    std::array<double, 2> res{};
    int pos = 0;
    for (int row : {kStokes, kAntiStokes}) {
      cplx s{};
      for (int q = 0; q < kModeCount; ++q) s += std::conj(u(row, q)) * moved.alpha[q];
      res[pos++] = std::abs(s);
    }
    red.delta_residuals.push_back(res);
    red.max_delta_residual = std::max({red.max_delta_residual, res[0], res[1]});
  }
  return red;
}

const char* separability_name(Separability s) {
  switch (s) {
    case Separability::separable:
      return "SEPARABLE";
    case Separability::entangled:
      return "ENTANGLED";
    case Separability::product:
      return "PRODUCT";
  }
  return "UNKNOWN";
}

WitnessReport separability_witness(const CoherentMixture& mixture) {
  mixture.validate();
  WitnessReport rep;
  rep.verdict = Separability::separable;
  rep.product_decomposition = mixture;
  rep.note = "convex mixture of coherent product states; the component list is the decomposition";
  return rep;
}

WitnessReport separability_witness(const TripartiteFockOutput& out) {
  WitnessReport rep;
  std::array<double, 3> purity{};
  for (int q = 0; q < kModeCount; ++q) {
    // Fixed total photon number pins the other two occupations given one, so
    // each single-mode reduced state is diagonal and its purity is the sum of
    // squared marginal probabilities. For a pure tripartite state the purity
    // across (mode | rest) equals the single-mode value.
    auto dist = marginal_distribution(out, q);
    double p2 = 0.0;
    for (double p : dist) p2 += p * p;
    purity[q] = p2;
  }
  rep.bipartition_purity = purity;
  bool mixed_marginal = false;
  for (double p : purity) mixed_marginal = mixed_marginal || p < 1.0 - 1e-12;
  rep.verdict = mixed_marginal ? Separability::entangled : Separability::product;
  rep.note = mixed_marginal ? "a bipartition has a mixed reduced state"
                            : "every bipartition has a pure reduced state";
  return rep;
}

std::string InputState::label() const {
  char buf[64];
  switch (kind) {
    case Kind::vacuum:
      return "vacuum";
    case Kind::coherent:
      std::snprintf(buf, sizeof buf, "coherent(|alpha|=%.6g)", std::abs(alpha));
      return buf;
    case Kind::fock:
      return "fock(" + std::to_string(n) + ")";
    case Kind::squeezed:
      std::snprintf(buf, sizeof buf, "squeezed(r=%.6g)", r);
      return buf;
    case Kind::thermal:
      std::snprintf(buf, sizeof buf, "thermal(nbar=%.6g)", nbar);
      return buf;
    case Kind::mixture:
      return "mixture(" + std::to_string(mixture.components.size()) + " components)";
  }
  return "unknown";
}

MomentSet mixture_moments(const CoherentMixture& mix, int n_top) {
  mix.validate();
  if (n_top < 1) throw ValidationError("n_top must be at least 1");
  MomentSet m;
  m.n_top = n_top;
  for (int q = 0; q < kModeCount; ++q) m.number[q].assign(static_cast<size_t>(n_top), 0.0);
  std::array<std::array<double, 3>, 3> cross{};
  bool sidebands_empty = true;
  for (const auto& c : mix.components) {
    const auto& a = c.point.alpha;
    sidebands_empty = sidebands_empty && a[kStokes] == cplx{} && a[kAntiStokes] == cplx{};
    for (int q = 0; q < kModeCount; ++q) {
      m.first[q] += c.weight * a[q];
      double n_q = std::norm(a[q]);
      double power = 1.0;
      for (int order = 1; order <= n_top; ++order) {
        power *= n_q;
        m.number[q][order - 1] += c.weight * power;
      }
      for (int r = 0; r < kModeCount; ++r) {
        m.pair[q][r] += c.weight * a[q] * a[r];
        m.hermitian[q][r] += c.weight * std::conj(a[q]) * a[r];
        if (q != r) cross[q][r] += c.weight * n_q * std::norm(a[r]);
      }
    }
  }
  m.cross_number = cross;
  m.vacuum_sidebands = sidebands_empty;
  m.gaussian = mix.components.size() == 1;  // a single coherent state is Gaussian
  return m;
}

MomentSet ideal_input_moments(const InputState& in, int n_top) {
  if (n_top < 1) throw ValidationError("n_top must be at least 1");
  if (in.kind == InputState::Kind::mixture) return mixture_moments(in.mixture, n_top);

  MomentSet m;
  m.n_top = n_top;
  m.vacuum_sidebands = true;
  for (int q = 0; q < kModeCount; ++q) m.number[q].assign(static_cast<size_t>(n_top), 0.0);
  m.cross_number = std::array<std::array<double, 3>, 3>{};

  switch (in.kind) {
    case InputState::Kind::vacuum:
      m.gaussian = true;
      break;
    case InputState::Kind::coherent: {
      m.gaussian = true;
      m.first[kProbe] = in.alpha;
      m.pair[kProbe][kProbe] = in.alpha * in.alpha;
      double n1 = std::norm(in.alpha);
      m.hermitian[kProbe][kProbe] = n1;
      double power = 1.0;
      for (int order = 1; order <= n_top; ++order) {
        power *= n1;
        m.number[kProbe][order - 1] = power;
      }
      break;
    }
    case InputState::Kind::fock: {
      if (in.n < 0) throw ValidationError("photon number must be non-negative");
      m.gaussian = false;
      m.hermitian[kProbe][kProbe] = static_cast<double>(in.n);
      double falling = 1.0;
      for (int order = 1; order <= n_top; ++order) {
        falling *= static_cast<double>(in.n - order + 1);
        if (in.n - order + 1 <= 0) falling = 0.0;
        m.number[kProbe][order - 1] = falling;
      }
      break;
    }
    case InputState::Kind::squeezed: {
      m.gaussian = true;
      double nu = std::sinh(in.r) * std::sinh(in.r);
      cplx sigma = -std::polar(1.0, in.theta) * std::sinh(in.r) * std::cosh(in.r);
      m.hermitian[kProbe][kProbe] = nu;
      m.pair[kProbe][kProbe] = sigma;
      Mat3 herm_c{};
      Mat3 pair_c{};
      herm_c[kProbe][kProbe] = nu;
      pair_c[kProbe][kProbe] = sigma;
      for (int order = 1; order <= n_top; ++order) {
        std::vector<GaussianLeg> legs;
        for (int i = 0; i < order; ++i) legs.push_back({kProbe, true});
        for (int i = 0; i < order; ++i) legs.push_back({kProbe, false});
        m.number[kProbe][order - 1] =
            gaussian_normal_moment(legs, std::array<cplx, 3>{}, herm_c, pair_c).real();
      }
      break;
    }
    case InputState::Kind::thermal: {
      if (in.nbar < 0.0) throw ValidationError("thermal mean photon number must be non-negative");
      m.gaussian = true;
      m.hermitian[kProbe][kProbe] = in.nbar;
      double value = 1.0;
      for (int order = 1; order <= n_top; ++order) {
        value *= static_cast<double>(order) * in.nbar;  // n! nbar^n
        m.number[kProbe][order - 1] = value;
      }
      break;
    }
    case InputState::Kind::mixture:
      break;  // handled above
  }
  return m;
}

std::vector<cplx> squeezed_fock_amplitudes(double r, double theta, int cutoff, double* discarded) {
  if (cutoff < 0) throw ValidationError("cutoff must be non-negative");
  if (r < 0.0) throw ValidationError("squeezing magnitude must be non-negative");
  std::vector<cplx> amps(static_cast<size_t>(cutoff) + 1, cplx{});
  cplx ratio = -std::polar(1.0, theta) * std::tanh(r);
  double inv_sqrt_cosh = 1.0 / std::sqrt(std::cosh(r));
  // c_{2k} = sqrt((2k)!) / (2^k k!) * ratio^k / sqrt(cosh r), built recursively:
  // c_{2k}/c_{2k-2} = ratio * sqrt((2k-1) (2k)) / (2k).
  cplx c = cplx(inv_sqrt_cosh, 0.0);
  amps[0] = c;
  double kept = std::norm(c);
  for (int k = 1; 2 * k <= cutoff; ++k) {
    double two_k = 2.0 * k;
    c *= ratio * std::sqrt((two_k - 1.0) * two_k) / two_k;
    amps[static_cast<size_t>(2 * k)] = c;
    kept += std::norm(c);
  }
  if (discarded) *discarded = std::max(0.0, 1.0 - kept);
  double scale = 1.0 / std::sqrt(kept);
  for (cplx& a : amps) a *= scale;
  return amps;
}

std::vector<double> thermal_weights(double nbar, int cutoff, double* discarded) {
  if (cutoff < 0) throw ValidationError("cutoff must be non-negative");
  if (nbar < 0.0) throw ValidationError("thermal mean photon number must be non-negative");
  std::vector<double> w(static_cast<size_t>(cutoff) + 1, 0.0);
  if (nbar == 0.0) {
    w[0] = 1.0;
    if (discarded) *discarded = 0.0;
    return w;
  }
  double ratio = nbar / (1.0 + nbar);
  double term = 1.0 / (1.0 + nbar);
  double kept = 0.0;
  for (int k = 0; k <= cutoff; ++k) {
    w[static_cast<size_t>(k)] = term;
    kept += term;
    term *= ratio;
  }
  if (discarded) *discarded = std::max(0.0, 1.0 - kept);
  for (double& v : w) v /= kept;
  return w;
}

fock::TruncatedState coherent_product_state(const fock::FockBasis& basis,
                                            const CoherentTriple& point, double* discarded) {
  int dim = basis.per_mode_dim();
  std::array<std::vector<cplx>, 3> per_mode;
  for (int q = 0; q < kModeCount; ++q) {
    per_mode[q].resize(static_cast<size_t>(dim));
    cplx term = std::exp(cplx(-0.5 * std::norm(point.alpha[q]), 0.0));
    for (int k = 0; k < dim; ++k) {
      per_mode[q][static_cast<size_t>(k)] = term;
      term *= point.alpha[q] / std::sqrt(static_cast<double>(k + 1));
    }
  }
  fock::TruncatedState state{basis, std::vector<cplx>(static_cast<size_t>(basis.dim()), cplx{})};
  double kept = 0.0;
  for (int ns = 0; ns < dim; ++ns) {
    for (int np = 0; np < dim; ++np) {
      cplx sp = per_mode[0][ns] * per_mode[1][np];
      for (int na = 0; na < dim; ++na) {
        cplx amp = sp * per_mode[2][na];
        state.amplitudes[static_cast<size_t>(basis.index_of(ns, np, na))] = amp;
        kept += std::norm(amp);
      }
    }
  }
  if (discarded) *discarded = std::max(0.0, 1.0 - kept);
  double scale = 1.0 / std::sqrt(kept);
  for (cplx& a : state.amplitudes) a *= scale;
  return state;
}

namespace {

void report_truncation(const std::string& label, double discarded, double tail_tol,
                       std::vector<std::string>* warnings) {
  if (discarded > tail_tol && warnings) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " input loses probability %.3e to truncation (tolerance %.3e)",
                  discarded, tail_tol);
    warnings->push_back(label + buf + "; state renormalized");
  }
}

}  // namespace

fock::StateEnsemble oracle_input_state(const InputState& in, const fock::FockBasis& basis,
                                       double tail_tol, std::vector<std::string>* warnings) {
  fock::StateEnsemble ens;
  auto blank = [&basis]() {
    return fock::TruncatedState{basis,
                                std::vector<cplx>(static_cast<size_t>(basis.dim()), cplx{})};
  };
  switch (in.kind) {
    case InputState::Kind::vacuum: {
      auto s = blank();
      s.amplitudes[static_cast<size_t>(basis.index_of(0, 0, 0))] = 1.0;
      ens.members.push_back({1.0, std::move(s)});
      break;
    }
    case InputState::Kind::coherent: {
      CoherentTriple probe_only;
      probe_only.alpha[kProbe] = in.alpha;
      double lost = 0.0;
      auto s = coherent_product_state(basis, probe_only, &lost);
      report_truncation("coherent", lost, tail_tol, warnings);
      ens.members.push_back({1.0, std::move(s)});
      break;
    }
    case InputState::Kind::fock: {
      if (in.n < 0) throw ValidationError("photon number must be non-negative");
      if (in.n > basis.n_max()) {
        throw ResourceError("Fock input |" + std::to_string(in.n) +
                            "> does not fit a basis with cutoff " +
                            std::to_string(basis.n_max()));
      }
      auto s = blank();
      s.amplitudes[static_cast<size_t>(basis.index_of(0, in.n, 0))] = 1.0;
      ens.members.push_back({1.0, std::move(s)});
      break;
    }
    case InputState::Kind::squeezed: {
      if (in.squeezed_cutoff > basis.n_max()) {
        throw ResourceError("squeezed expansion cutoff " + std::to_string(in.squeezed_cutoff) +
                            " exceeds the basis cutoff " + std::to_string(basis.n_max()));
      }
      double lost = 0.0;
      auto amps = squeezed_fock_amplitudes(in.r, in.theta, in.squeezed_cutoff, &lost);
      report_truncation("squeezed", lost, tail_tol, warnings);
      auto s = blank();
      for (size_t k = 0; k < amps.size(); ++k) {
        s.amplitudes[static_cast<size_t>(basis.index_of(0, static_cast<int>(k), 0))] = amps[k];
      }
      ens.members.push_back({1.0, std::move(s)});
      break;
    }
    case InputState::Kind::thermal: {
      if (in.thermal_cutoff > basis.n_max()) {
        throw ResourceError("thermal cutoff " + std::to_string(in.thermal_cutoff) +
                            " exceeds the basis cutoff " + std::to_string(basis.n_max()));
      }
      double lost = 0.0;
      auto weights = thermal_weights(in.nbar, in.thermal_cutoff, &lost);
      report_truncation("thermal", lost, tail_tol, warnings);
      for (size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        auto s = blank();
        s.amplitudes[static_cast<size_t>(basis.index_of(0, static_cast<int>(k), 0))] = 1.0;
        ens.members.push_back({weights[k], std::move(s)});
      }
      break;
    }
    case InputState::Kind::mixture: {
      in.mixture.validate();
      for (const auto& c : in.mixture.components) {
        double lost = 0.0;
        auto s = coherent_product_state(basis, c.point, &lost);
        report_truncation("mixture component", lost, tail_tol, warnings);
        ens.members.push_back({c.weight, std::move(s)});
      }
      break;
    }
  }
  ens.validate();
  return ens;
}

fock::TruncatedState to_truncated(const TripartiteFockOutput& out, const fock::FockBasis& basis) {
  if (out.n > basis.n_max()) {
    throw ResourceError("Fock output with n = " + std::to_string(out.n) +
                        " does not fit a basis with cutoff " + std::to_string(basis.n_max()));
  }
  fock::TruncatedState state{basis,
                             std::vector<cplx>(static_cast<size_t>(basis.dim()), cplx{})};
  for (int l = 0; l <= out.n; ++l) {
    for (int m = 0; m <= l; ++m) {
      auto ns = TripartiteFockOutput::occupations_of(out.n, l, m);
      state.amplitudes[static_cast<size_t>(basis.index_of(ns[0], ns[1], ns[2]))] =
          out.amplitude(l, m);
    }
  }
  return state;
}

CoherentMixture sample_thermal_mixture(double nbar, int count, std::uint64_t seed) {
  if (count < 1) throw ValidationError("sample count must be positive");
  if (nbar < 0.0) throw ValidationError("thermal mean photon number must be non-negative");
  CoherentMixture mix;
  mix.components.reserve(static_cast<size_t>(count));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> quad(0.0, nbar > 0.0 ? std::sqrt(0.5 * nbar) : 0.0);
  double w = 1.0 / static_cast<double>(count);
  for (int i = 0; i < count; ++i) {
    CoherentTriple point;
    double re = nbar > 0.0 ? quad(rng) : 0.0;
    double im = nbar > 0.0 ? quad(rng) : 0.0;
    point.alpha[kProbe] = cplx(re, im);
    mix.components.push_back({w, point});
  }
  return mix;
}

}  // namespace raman
