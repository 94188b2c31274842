#include "raman/statistics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace raman {
namespace {

constexpr double kPi = std::numbers::pi;

double wrap_half_turn(double phi) {
  double w = std::fmod(phi, kPi);
  if (w < 0.0) w += kPi;
  if (w >= kPi) w -= kPi;  // fmod can land exactly on pi after the rounding above
  return w;
}

std::string mode_order_label(int mode, int order) {
  return std::string(mode_name(mode)) + " order " + std::to_string(order);
}

}  // namespace

double MomentSet::occupation(int mode) const { return hermitian[mode][mode].real(); }

double MomentSet::total_occupation() const {
  return occupation(kStokes) + occupation(kProbe) + occupation(kAntiStokes);
}

bool MomentSet::has_number_moment(int mode, int order) const {
  if (order < 1) return false;
  if (order == 1) return true;
  return static_cast<int>(number[mode].size()) >= order;
}

double MomentSet::number_moment(int mode, int order) const {
  if (order == 1 && number[mode].empty()) return occupation(mode);
  if (!has_number_moment(mode, order)) {
    throw UnsupportedMomentError("number moment unavailable for mode " +
                                 mode_order_label(mode, order) +
                                 "; input class tracks first and second moments only");
  }
  return number[mode][order - 1];
}

double MomentSet::cross_number_moment(int k, int l) const {
  if (k == l) throw ValidationError("cross_number_moment needs two distinct modes");
  if (!cross_number) {
    throw UnsupportedMomentError("cross number moments unavailable for this input class");
  }
  return (*cross_number)[k][l];
}

void MomentSet::validate(double tol) const {
  if (n_top < 1) throw ValidationError("n_top must be at least 1");
  Eigen::Matrix3cd m;
  for (int q = 0; q < kModeCount; ++q) {
    for (int r = 0; r < kModeCount; ++r) m(q, r) = hermitian[q][r];
  }
  for (int q = 0; q < kModeCount; ++q) {
    if (std::abs(hermitian[q][q].imag()) > tol) {
      throw ValidationError("occupation of " + std::string(mode_name(q)) + " is not real");
    }
    if (hermitian[q][q].real() < -tol) {
      throw ValidationError("occupation of " + std::string(mode_name(q)) + " is negative");
    }
    for (int r = 0; r < q; ++r) {
      if (std::abs(hermitian[q][r] - std::conj(hermitian[r][q])) > tol) {
        throw ValidationError("second-moment matrix is not hermitian");
      }
      if (std::abs(pair[q][r] - pair[r][q]) > tol) {
        throw ValidationError("pair-moment matrix is not symmetric");
      }
      double bound = std::sqrt(std::max(0.0, occupation(q)) * std::max(0.0, occupation(r)));
      if (std::abs(hermitian[q][r]) > bound + tol) {
        throw ValidationError("second moments violate the Cauchy-Schwarz bound");
      }
    }
    for (int r = 0; r <= q; ++r) {
      // |<b_q b_r>|^2 <= <b_q b_q^dag><b_r^dag b_r> in either order; tight for
      // squeezed vacuum, so the tolerance matters.
      double nq = std::max(0.0, occupation(q));
      double nr = std::max(0.0, occupation(r));
      double bound = std::sqrt(std::min((nq + 1.0) * nr, (nr + 1.0) * nq));
      if (std::abs(pair[q][r]) > bound + tol) {
        throw ValidationError("pair moments violate the Cauchy-Schwarz bound");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw ValidationError("second-moment matrix has a negative eigenvalue");
  }
  for (int q = 0; q < kModeCount; ++q) {
    if (static_cast<int>(number[q].size()) > n_top) {
      throw ValidationError("number moment list longer than n_top");
    }
    for (double v : number[q]) {
      if (!(v >= -tol)) throw ValidationError("negative number moment");
    }
    if (!number[q].empty() && std::abs(number[q][0] - occupation(q)) > tol) {
      throw ValidationError("first number moment disagrees with the occupation");
    }
  }
  if (vacuum_sidebands) {
    for (int q : {kStokes, kAntiStokes}) {
      if (occupation(q) > tol || std::abs(first[q]) > tol) {
        throw ValidationError("vacuum_sidebands set but the " + std::string(mode_name(q)) +
                              " mode is populated");
      }
    }
  }
}

std::array<double, 3> transfer_weights(const CouplingParams& p) {
  double s = sinc_gt(p.g(), p.time);  // sin(g t)/g
  double ta = p.g1 * s;
  double ts = p.gm1 * s;
  double tc = p.g_c() * s;
  return {ts * ts, 1.0 - tc * tc, ta * ta};
}

std::array<double, 3> photon_moments_vacuum_sidebands(const std::vector<double>& probe_number_moments,
                                                      const CouplingParams& p, int order) {
  if (order < 1) throw ValidationError("moment order must be at least 1");
  if (static_cast<int>(probe_number_moments.size()) < order) {
    throw UnsupportedMomentError("probe moment of order " + std::to_string(order) +
                                 " not provided");
  }
  double m = probe_number_moments[order - 1];
  auto t = transfer_weights(p);
  std::array<double, 3> out{};
  for (int q = 0; q < kModeCount; ++q) out[q] = std::pow(t[q], order) * m;
  return out;
}

SharedCorrelation autocorrelation(const std::vector<double>& probe_number_moments, int order) {
  if (order < 1) throw ValidationError("correlation order must be at least 1");
  if (static_cast<int>(probe_number_moments.size()) < order) {
    throw UnsupportedMomentError("probe moment of order " + std::to_string(order) +
                                 " not provided");
  }
  double m1 = probe_number_moments[0];
  if (m1 <= 0.0) {
    throw UndefinedCorrelationError("autocorrelation undefined: the input carries no photons");
  }
  return {probe_number_moments[order - 1] / std::pow(m1, order), order};
}

SharedCorrelation cross_correlation(const std::vector<double>& probe_number_moments) {
  SharedCorrelation g2 = autocorrelation(probe_number_moments, 2);
  return {g2.value, 2};
}

double mode_autocorrelation(const MomentSet& propagated, int mode, int order) {
  double m1 = propagated.occupation(mode);
  if (m1 <= 0.0) {
    throw UndefinedCorrelationError("autocorrelation undefined: " +
                                    std::string(mode_name(mode)) + " output is empty");
  }
  return propagated.number_moment(mode, order) / std::pow(m1, order);
}

double pair_cross_correlation(const MomentSet& propagated, int k, int l) {
  double nk = propagated.occupation(k);
  double nl = propagated.occupation(l);
  if (nk <= 0.0 || nl <= 0.0) {
    throw UndefinedCorrelationError("cross correlation undefined for an empty output mode");
  }
  return propagated.cross_number_moment(k, l) / (nk * nl);
}

cplx gaussian_normal_moment(std::span<const GaussianLeg> legs, const std::array<cplx, 3>& mean,
                            const Mat3& centered_hermitian, const Mat3& centered_pair) {
  for (size_t i = 1; i < legs.size(); ++i) {
    if (legs[i].dagger && !legs[i - 1].dagger) {
      throw ValidationError("gaussian_normal_moment needs daggered factors first");
    }
  }
  auto contraction = [&](const GaussianLeg& a, const GaussianLeg& b) -> cplx {
    if (a.dagger && b.dagger) return std::conj(centered_pair[a.mode][b.mode]);
    if (!a.dagger && !b.dagger) return centered_pair[a.mode][b.mode];
    return centered_hermitian[a.mode][b.mode];  // a daggered, b not (order is preserved)
  };
  // Gaussian moment recursion: the leading factor either contributes its mean
  // or contracts with one later factor. Normal order is preserved under
  // removal, so the (plain, daggered) pairing never occurs.
  std::vector<GaussianLeg> work(legs.begin(), legs.end());
  auto eval = [&](auto&& self, std::vector<GaussianLeg>& v) -> cplx {
    if (v.empty()) return cplx(1.0, 0.0);
    GaussianLeg head = v.front();
    cplx head_mean = head.dagger ? std::conj(mean[head.mode]) : mean[head.mode];
    std::vector<GaussianLeg> rest(v.begin() + 1, v.end());
    cplx total = head_mean * self(self, rest);
    for (size_t j = 0; j < rest.size(); ++j) {
      std::vector<GaussianLeg> sub;
      sub.reserve(rest.size() - 1);
      for (size_t i = 0; i < rest.size(); ++i) {
        if (i != j) sub.push_back(rest[i]);
      }
      total += contraction(head, rest[j]) * self(self, sub);
    }
    return total;
  };
  return eval(eval, work);
}

namespace {

// <b_q^dag^n b_q^n ...> legs for one mode, daggers first.
std::vector<GaussianLeg> number_legs(int mode, int order) {
  std::vector<GaussianLeg> legs;
  legs.reserve(2 * static_cast<size_t>(order));
  for (int i = 0; i < order; ++i) legs.push_back({mode, true});
  for (int i = 0; i < order; ++i) legs.push_back({mode, false});
  return legs;
}

}  // namespace

MomentSet propagate_moments(const MomentSet& input, const PropagatorMatrix& u) {
  MomentSet out;
  out.n_top = input.n_top;
  out.gaussian = input.gaussian;
  out.vacuum_sidebands = false;
  for (int q = 0; q < kModeCount; ++q) {
    cplx f{};
    for (int r = 0; r < kModeCount; ++r) f += u(q, r) * input.first[r];
    out.first[q] = f;
  }
  for (int q = 0; q < kModeCount; ++q) {
    for (int r = 0; r < kModeCount; ++r) {
      cplx pqr{};
      cplx hqr{};
      for (int a = 0; a < kModeCount; ++a) {
        for (int b = 0; b < kModeCount; ++b) {
          pqr += u(q, a) * u(r, b) * input.pair[a][b];
          hqr += std::conj(u(q, a)) * u(r, b) * input.hermitian[a][b];
        }
      }
      out.pair[q][r] = pqr;
      out.hermitian[q][r] = hqr;
    }
  }

  if (input.vacuum_sidebands) {
    // Sidebands start empty, so every output number moment is the probe input
    // moment attenuated by a power of the transfer weight.
    std::vector<double> probe = input.number[kProbe];
    if (probe.empty()) probe.push_back(input.occupation(kProbe));
    int depth = std::min<int>(input.n_top, static_cast<int>(probe.size()));
    for (int q = 0; q < kModeCount; ++q) out.number[q].resize(depth);
    for (int order = 1; order <= depth; ++order) {
      auto m = photon_moments_vacuum_sidebands(probe, u.params, order);
      for (int q = 0; q < kModeCount; ++q) out.number[q][order - 1] = m[q];
    }
    if (depth >= 2) {
      auto t = transfer_weights(u.params);
      std::array<std::array<double, 3>, 3> cross{};
      for (int k = 0; k < kModeCount; ++k) {
        for (int l = 0; l < kModeCount; ++l) {
          if (k != l) cross[k][l] = t[k] * t[l] * probe[1];
        }
      }
      out.cross_number = cross;
    }
    return out;
  }

  if (input.gaussian) {
    Mat3 nu{};
    Mat3 sigma{};
    for (int q = 0; q < kModeCount; ++q) {
      for (int r = 0; r < kModeCount; ++r) {
        nu[q][r] = out.hermitian[q][r] - std::conj(out.first[q]) * out.first[r];
        sigma[q][r] = out.pair[q][r] - out.first[q] * out.first[r];
      }
    }
    for (int q = 0; q < kModeCount; ++q) {
      out.number[q].resize(input.n_top);
      for (int order = 1; order <= input.n_top; ++order) {
        auto legs = number_legs(q, order);
        out.number[q][order - 1] = gaussian_normal_moment(legs, out.first, nu, sigma).real();
      }
    }
    std::array<std::array<double, 3>, 3> cross{};
    for (int k = 0; k < kModeCount; ++k) {
      for (int l = 0; l < kModeCount; ++l) {
        if (k == l) continue;
        std::vector<GaussianLeg> legs{{k, true}, {l, true}, {k, false}, {l, false}};
        cross[k][l] = gaussian_normal_moment(legs, out.first, nu, sigma).real();
      }
    }
    out.cross_number = cross;
    return out;
  }

  // Generic inputs only carry first and second moments forward; higher number
  // moments would need fourth-order input correlations that are not tracked.
  return out;
}

double squeezing_value(const ProbeQuadratureMoments& m, double phi) {
  double nu = m.occupation - std::norm(m.mean);
  cplx sigma = m.second - m.mean * m.mean;
  return 2.0 * nu + 2.0 * (sigma * std::polar(1.0, -2.0 * phi)).real();
}

namespace {

struct CenteredQuadrature {
  double nu = 0.0;
  cplx sigma{};
};

double curve_value(const CenteredQuadrature& c, double phi) {
  return 2.0 * c.nu + 2.0 * (c.sigma * std::polar(1.0, -2.0 * phi)).real();
}

// Parabola through the grid minimum and its two neighbours (period pi), then
// an exact re-evaluation at the vertex.
void refine_minimum(const CenteredQuadrature& c, const std::vector<double>& phase,
                    const std::vector<double>& value, SqueezingCurve* curve) {
  size_t n = value.size();
  size_t k = static_cast<size_t>(std::min_element(value.begin(), value.end()) - value.begin());
  double step = kPi / static_cast<double>(n);
  double ym = value[(k + n - 1) % n];
  double y0 = value[k];
  double yp = value[(k + 1) % n];
  double denom = ym - 2.0 * y0 + yp;
  double offset = 0.0;
  if (std::abs(denom) > 1e-300) {
    offset = 0.5 * (ym - yp) / denom;
    offset = std::clamp(offset, -1.0, 1.0);
  }
  double phi_v = wrap_half_turn(phase[k] + offset * step);
  double yv = curve_value(c, phi_v);
  if (yv <= y0) {
    curve->min_value = yv;
    curve->min_phase = phi_v;
  } else {
    curve->min_value = y0;
    curve->min_phase = phase[k];
  }
}

}  // namespace

const std::vector<double>& SqueezingReport::normalized_curve(int mode) const {
  if (!normalized_defined[mode]) {
    throw UndefinedNormalizationError("normalized squeezing undefined: " +
                                      std::string(mode_name(mode)) + " output carries no photons");
  }
  return normalized[mode];
}

SqueezingReport squeezing_transfer(const ProbeQuadratureMoments& input, const CouplingParams& p,
                                   int phi_points) {
  if (phi_points < 8 || phi_points % 2 != 0) {
    throw ValidationError("phase grid must have an even size of at least 8");
  }
  if (!(input.occupation >= 0.0)) {
    throw ValidationError("probe occupation must be non-negative");
  }
  {
    double nu = input.occupation - std::norm(input.mean);
    cplx sig = input.second - input.mean * input.mean;
    double scale = std::max(1.0, input.occupation);
    if (nu < -1e-6 * scale) {
      throw ValidationError("probe moments violate the variance bound");
    }
    double cap = std::sqrt(std::max(nu, 0.0) * (std::max(nu, 0.0) + 1.0));
    if (std::abs(sig) > cap + 1e-6 * scale + 1e-12) {
      throw ValidationError("probe moments violate the uncertainty bound");
    }
  }
  p.validate();
  PropagatorMatrix u = build_propagator(p);
  auto transfer = transfer_weights(p);
  double phi_l = reference_phase(u);

  SqueezingReport rep;
  rep.transfer = transfer;
  rep.reference_phase = phi_l;
  for (int q = 0; q < kModeCount; ++q) rep.occupation[q] = transfer[q] * input.occupation;

  // Independent route: push <b>, <b^2>, <b^dag b> through the probe column of
  // the rotation and re-center. Algebraically this must match the shifted and
  // attenuated input curve; the residual check below keeps the two code paths
  // honest against each other.
  std::array<CenteredQuadrature, 3> centered;
  for (int q = 0; q < kModeCount; ++q) {
    cplx uqp = u(q, kProbe);
    cplx mean_out = uqp * input.mean;
    cplx second_out = uqp * uqp * input.second;
    double occ_out = std::norm(uqp) * input.occupation;
    centered[q].nu = occ_out - std::norm(mean_out);
    centered[q].sigma = second_out - mean_out * mean_out;
  }

  std::vector<double> grid(static_cast<size_t>(phi_points));
  for (int k = 0; k < phi_points; ++k) grid[k] = kPi * k / phi_points;

  double worst = 0.0;
  for (int q = 0; q < kModeCount; ++q) {
    SqueezingCurve& curve = rep.curves[q];
    curve.phase = grid;
    curve.value.resize(grid.size());
    double shift = (q == kProbe) ? phi_l : 0.5 * kPi;
    for (size_t k = 0; k < grid.size(); ++k) {
      double via_transfer = transfer[q] * squeezing_value(input, grid[k] - shift);
      curve.value[k] = via_transfer;
      worst = std::max(worst, std::abs(via_transfer - curve_value(centered[q], grid[k])));
    }
    refine_minimum(centered[q], curve.phase, curve.value, &curve);
    double abs_sigma = std::abs(centered[q].sigma);
    curve.closed_form_min = 2.0 * centered[q].nu - 2.0 * abs_sigma;
    curve.closed_form_phase =
        abs_sigma > 0.0 ? wrap_half_turn(0.5 * (std::arg(centered[q].sigma) + kPi)) : 0.0;

    rep.normalized_defined[q] = rep.occupation[q] > 0.0;
    if (rep.normalized_defined[q]) {
      rep.normalized[q].resize(curve.value.size());
      for (size_t k = 0; k < curve.value.size(); ++k) {
        rep.normalized[q][k] = curve.value[k] / rep.occupation[q];
      }
    }
  }
  rep.route_residual = worst;

  // Shift identities between the normalized curves and the normalized input
  // curve. Both sides are evaluated through independent expressions; modes
  // with transfer below 1e-6 are skipped because dividing by a vanishing
  // occupation amplifies rounding without adding information.
  if (input.occupation > 0.0) {
    double s_scale = 1.0;
    std::vector<double> s_in(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
      s_in[k] = squeezing_value(input, grid[k]) / input.occupation;
      s_scale = std::max(s_scale, std::abs(s_in[k]));
    }
    double relation = 0.0;
    size_t half = grid.size() / 2;  // grid step times half = pi/2 exactly
    for (int q : {kStokes, kAntiStokes}) {
      if (transfer[q] < 1e-6) continue;
      for (size_t k = 0; k < grid.size(); ++k) {
        double s = curve_value(centered[q], grid[(k + half) % grid.size()]) / rep.occupation[q];
        relation = std::max(relation, std::abs(s - s_in[k]));
      }
    }
    if (transfer[kProbe] >= 1e-6) {
      for (size_t k = 0; k < grid.size(); ++k) {
        double s = curve_value(centered[kProbe], grid[k] + phi_l) / rep.occupation[kProbe];
        relation = std::max(relation, std::abs(s - s_in[k]));
      }
    }
    rep.relation_residual = relation;
    if (relation > 1e-9 * s_scale) {
      throw VerificationError("squeezing routes disagree: normalized shift residual " +
                              std::to_string(relation));
    }
  }
  return rep;
}

}  // namespace raman
