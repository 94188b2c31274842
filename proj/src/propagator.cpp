#include "raman/propagator.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace raman {

double sinc_gt_series(double g, double t) {
  const double x = g * t;
  return t * (1.0 - x * x / 6.0);
}

double sinc_gt(double g, double t) {
  const double x = g * t;
  if (std::abs(x) < 1e-8) return sinc_gt_series(g, t);
  return std::sin(x) / g;
}

double PropagatorMatrix::unitarity_defect() const {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      cplx acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += std::conj(u[k][i]) * u[k][j];
      if (i == j) acc -= 1.0;
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

PropagatorMatrix build_propagator(const CouplingParams& p) {
  p.validate();
  const double gc = p.g_c();
  const double g = p.g();
  const double t = p.time;
  const double gt = g * t;

  const double sinc = sinc_gt(g, t);  // sin(gt)/g
  const cplx u00(std::cos(gt), p.delta * sinc);
  const cplx mismatch_phase = std::polar(1.0, -p.delta * t);
  const double w1 = (p.g1 / gc) * (p.g1 / gc);
  const double wm1 = (p.gm1 / gc) * (p.gm1 / gc);

  PropagatorMatrix out;
  out.params = p;
  auto& u = out.u;
  u[kProbe][kProbe] = u00;
  u[kAntiStokes][kAntiStokes] = w1 * std::conj(u00) + wm1 * mismatch_phase;
  u[kStokes][kStokes] = wm1 * std::conj(u00) + w1 * mismatch_phase;
  u[kStokes][kAntiStokes] = (p.g1 * p.gm1 / (gc * gc)) * (std::conj(u00) - mismatch_phase);
  u[kAntiStokes][kStokes] = u[kStokes][kAntiStokes];
  u[kProbe][kAntiStokes] = cplx(0.0, p.g1 * sinc);
  u[kAntiStokes][kProbe] = u[kProbe][kAntiStokes];
  u[kProbe][kStokes] = cplx(0.0, p.gm1 * sinc);
  u[kStokes][kProbe] = u[kProbe][kStokes];
  return out;
}

ModeDecomposition decompose_modes(const CouplingParams& p) {
  p.validate();
  const double gc = p.g_c();
  const double g = p.g();
  const double gp = g + p.delta;
  const double gm = g - p.delta;
  const double inv = 1.0 / std::sqrt(2.0 * g);

  ModeDecomposition out;
  out.coupled_weights = {p.g1 / gc, p.gm1 / gc};
  out.uncoupled_weights = {p.gm1 / gc, -p.g1 / gc};
  out.normal_weights[0] = {std::sqrt(gm) * inv, -std::sqrt(gp) * inv};
  out.normal_weights[1] = {std::sqrt(gp) * inv, std::sqrt(gm) * inv};
  out.frequencies = {p.delta, g, -g};
  return out;
}

PropagatorMatrix propagator_via_modes(const CouplingParams& p) {
  const ModeDecomposition d = decompose_modes(p);
  const double gc = p.g_c();

  // Rows of the real orthogonal basis change, over (stokes, probe, anti_stokes):
  // uncoupled, plus, minus. The coupled mode itself is (gm1, 0, g1)/gc.
  double w[3][3];
  w[0][kStokes] = -d.coupled_weights[0];  // -g1/gc
  w[0][kProbe] = 0.0;
  w[0][kAntiStokes] = d.coupled_weights[1];  // gm1/gc
  for (int row = 0; row < 2; ++row) {
    const double on_probe = d.normal_weights[row][0];
    const double on_coupled = d.normal_weights[row][1];
    w[row + 1][kStokes] = on_coupled * (p.gm1 / gc);
    w[row + 1][kProbe] = on_probe;
    w[row + 1][kAntiStokes] = on_coupled * (p.g1 / gc);
  }

  cplx phases[3];
  for (int m = 0; m < 3; ++m) phases[m] = std::polar(1.0, -d.frequencies[m] * p.time);

  PropagatorMatrix out;
  out.params = p;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      cplx acc = 0.0;
      for (int m = 0; m < 3; ++m) acc += w[m][a] * phases[m] * w[m][b];
      out.u[a][b] = acc;
    }
  }
  return out;
}

std::array<std::array<double, 3>, 3> hamiltonian_spec(const CouplingParams& p) {
  p.validate();
  std::array<std::array<double, 3>, 3> h{};
  h[kStokes][kStokes] = p.delta;
  h[kProbe][kProbe] = -p.delta;
  h[kAntiStokes][kAntiStokes] = p.delta;
  h[kProbe][kAntiStokes] = -p.g1;
  h[kAntiStokes][kProbe] = -p.g1;
  h[kProbe][kStokes] = -p.gm1;
  h[kStokes][kProbe] = -p.gm1;
  return h;
}

PropagatorMatrix propagator_via_hamiltonian(const CouplingParams& p) {
  const auto h = hamiltonian_spec(p);
  Eigen::Matrix3d hm;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) hm(i, j) = h[i][j];

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(hm);
  const auto& w = es.eigenvalues();
  const auto& v = es.eigenvectors();

  PropagatorMatrix out;
  out.params = p;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      cplx acc = 0.0;
      for (int m = 0; m < 3; ++m) {
        acc += v(a, m) * std::polar(1.0, -w(m) * p.time) * v(b, m);
      }
      out.u[a][b] = acc;
    }
  }
  return out;
}

double reference_phase(const PropagatorMatrix& u) {
  return std::arg(u.u[kProbe][kProbe]);
}

}  // namespace raman
