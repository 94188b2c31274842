#include "raman/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <Eigen/Dense>

#ifdef RAMAN_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace raman::fock {

FockBasis::FockBasis(int n_max) : n_max_(n_max) {
  if (n_max < 0) throw ValidationError("n_max must be >= 0");
  if (n_max > kHardCeiling) {
    throw ResourceError("n_max = " + std::to_string(n_max) + " exceeds the ceiling " +
                        std::to_string(kHardCeiling));
  }
}

long FockBasis::dim() const {
  const long d = per_mode_dim();
  return d * d * d;
}

long FockBasis::index_of(int n_stokes, int n_probe, int n_anti) const {
  const long d = per_mode_dim();
  return (static_cast<long>(n_stokes) * d + n_probe) * d + n_anti;
}

std::array<int, 3> FockBasis::occupations(long index) const {
  const long d = per_mode_dim();
  const int anti = static_cast<int>(index % d);
  const int probe = static_cast<int>((index / d) % d);
  const int stokes = static_cast<int>(index / (d * d));
  return {stokes, probe, anti};
}

double TruncatedState::norm() const {
  return std::sqrt(norm_sq(Exec::serial, amplitudes.data(), static_cast<long>(amplitudes.size())));
}

double TruncatedState::tail_mass() const {
  const int top = basis.n_max();
  double mass = 0.0;
  for (long i = 0; i < static_cast<long>(amplitudes.size()); ++i) {
    const auto occ = basis.occupations(i);
    if (occ[0] == top || occ[1] == top || occ[2] == top) mass += std::norm(amplitudes[i]);
  }
  return mass;
}

void TruncatedState::normalize() {
  const double n = norm();
  if (n == 0.0) throw ValidationError("cannot normalize the zero state");
  for (auto& a : amplitudes) a /= n;
}

void StateEnsemble::validate() const {
  if (members.empty()) throw ValidationError("ensemble must have at least one member");
  double sum = 0.0;
  for (const auto& m : members) {
    if (!(m.weight > 0.0)) throw ValidationError("ensemble weights must be > 0");
    sum += m.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("ensemble weights must sum to 1 (got " + format_sig17(sum) + ")");
  }
}

namespace {

long mode_stride(const FockBasis& basis, int mode) {
  const long d = basis.per_mode_dim();
  switch (mode) {
    case kStokes:
      return d * d;
    case kProbe:
      return d;
    case kAntiStokes:
      return 1;
    default:
      throw ValidationError("mode index out of range: " + std::to_string(mode));
  }
}

}  // namespace

CsrMatrix annihilation_matrix(const FockBasis& basis, int mode) {
  const long dim = basis.dim();
  const long stride = mode_stride(basis, mode);
  const int top = basis.n_max();

  CsrMatrix m;
  m.rows = m.cols = dim;
  m.row_ptr.assign(dim + 1, 0);
  m.col_idx.reserve(dim);
  m.values.reserve(dim);
  for (long i = 0; i < dim; ++i) {
    m.row_ptr[i] = m.nnz();
    const int occ = basis.occupations(i)[mode];
    if (occ < top) {
      // <occ| b |occ+1> = sqrt(occ+1)
      m.col_idx.push_back(i + stride);
      m.values.push_back(std::sqrt(static_cast<double>(occ + 1)));
    }
  }
  m.row_ptr[dim] = m.nnz();
  return m;
}

CsrMatrix creation_matrix(const FockBasis& basis, int mode) {
  const long dim = basis.dim();
  const long stride = mode_stride(basis, mode);

  CsrMatrix m;
  m.rows = m.cols = dim;
  m.row_ptr.assign(dim + 1, 0);
  m.col_idx.reserve(dim);
  m.values.reserve(dim);
  for (long i = 0; i < dim; ++i) {
    m.row_ptr[i] = m.nnz();
    const int occ = basis.occupations(i)[mode];
    if (occ > 0) {
      m.col_idx.push_back(i - stride);
      m.values.push_back(std::sqrt(static_cast<double>(occ)));
    }
  }
  m.row_ptr[dim] = m.nnz();
  return m;
}

CsrMatrix hamiltonian_matrix(const FockBasis& basis, const CouplingParams& p) {
  p.validate();
  const long dim = basis.dim();
  const int top = basis.n_max();

  struct Entry {
    long row, col;
    double val;
  };
  std::vector<Entry> coo;
  coo.reserve(5 * dim);
  for (long j = 0; j < dim; ++j) {
    const auto [ns, np, na] = basis.occupations(j);
    coo.push_back({j, j, p.delta * static_cast<double>(ns + na - np)});
    // -g1 (b0 b1^dag + b1 b0^dag), -gm1 (b0 bm1^dag + bm1 b0^dag)
    if (np >= 1 && na + 1 <= top) {
      coo.push_back({basis.index_of(ns, np - 1, na + 1), j,
                     -p.g1 * std::sqrt(static_cast<double>(np) * (na + 1))});
    }
    if (na >= 1 && np + 1 <= top) {
      coo.push_back({basis.index_of(ns, np + 1, na - 1), j,
                     -p.g1 * std::sqrt(static_cast<double>(na) * (np + 1))});
    }
    if (np >= 1 && ns + 1 <= top) {
      coo.push_back({basis.index_of(ns + 1, np - 1, na), j,
                     -p.gm1 * std::sqrt(static_cast<double>(np) * (ns + 1))});
    }
    if (ns >= 1 && np + 1 <= top) {
      coo.push_back({basis.index_of(ns - 1, np + 1, na), j,
                     -p.gm1 * std::sqrt(static_cast<double>(ns) * (np + 1))});
    }
  }
  std::sort(coo.begin(), coo.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });

  CsrMatrix m;
  m.rows = m.cols = dim;
  m.row_ptr.assign(dim + 1, 0);
  m.col_idx.reserve(coo.size());
  m.values.reserve(coo.size());
  long row = 0;
  for (const auto& e : coo) {
    while (row <= e.row) m.row_ptr[row++] = m.nnz();
    m.col_idx.push_back(e.col);
    m.values.push_back(e.val);
  }
  while (row <= dim) m.row_ptr[row++] = m.nnz();
  return m;
}

bool lapack_available() {
#ifdef RAMAN_HAVE_LAPACKE
  return true;
#else
  return false;
#endif
}

namespace {

// In-place Hermitian eigendecomposition of a column-major block: on return the
// matrix holds the eigenvectors.
void hermitian_eigensystem(std::vector<cplx>& a, std::vector<double>& w, long n,
                           EigenDriver driver) {
  if (driver == EigenDriver::automatic) {
    driver = lapack_available() ? EigenDriver::lapack : EigenDriver::eigen;
  }
  w.resize(n);
  if (driver == EigenDriver::lapack) {
#ifdef RAMAN_HAVE_LAPACKE
    const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                    reinterpret_cast<lapack_complex_double*>(a.data()),
                                    static_cast<lapack_int>(n), w.data());
    if (info != 0) {
      throw ResourceError("zheevd failed with info = " + std::to_string(info));
    }
    return;
#else
    throw ValidationError("lapack eigensolver requested but not built in");
#endif
  }
  Eigen::Map<Eigen::MatrixXcd> m(a.data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw ResourceError("Eigen eigensolver failed");
  Eigen::Map<Eigen::VectorXd>(w.data(), n) = es.eigenvalues();
  m = es.eigenvectors();
}

std::vector<std::vector<long>> sector_partition(const FockBasis& basis) {
  std::vector<std::vector<long>> sectors(3 * basis.n_max() + 1);
  for (long i = 0; i < basis.dim(); ++i) {
    const auto occ = basis.occupations(i);
    sectors[occ[0] + occ[1] + occ[2]].push_back(i);
  }
  return sectors;
}

}  // namespace

Evolver::Evolver(const FockBasis& basis, const CouplingParams& p, EigenDriver driver)
    : basis_(basis) {
  const CsrMatrix h = hamiltonian_matrix(basis, p);
  std::vector<long> local(basis.dim());
  auto partition = sector_partition(basis);
  sectors_.reserve(partition.size());
  for (auto& idx : partition) {
    for (long k = 0; k < static_cast<long>(idx.size()); ++k) local[idx[k]] = k;
    const long ns = static_cast<long>(idx.size());
    Sector s;
    s.indices = std::move(idx);
    s.vectors.assign(ns * ns, cplx(0.0));
    for (long r = 0; r < ns; ++r) {
      const long gi = s.indices[r];
      for (long k = h.row_ptr[gi]; k < h.row_ptr[gi + 1]; ++k) {
        // every entry of a row stays inside that row's sector
        s.vectors[r + local[h.col_idx[k]] * ns] = h.values[k];
      }
    }
    hermitian_eigensystem(s.vectors, s.eigenvalues, ns, driver);
    sectors_.push_back(std::move(s));
  }
}

long Evolver::max_sector_dim() const {
  long best = 0;
  for (const auto& s : sectors_) best = std::max(best, static_cast<long>(s.indices.size()));
  return best;
}

TruncatedState Evolver::apply(const TruncatedState& in, double time, Exec ex) const {
  if (!(in.basis == basis_)) throw BasisMismatchError("state basis does not match the evolver");
  TruncatedState out{basis_, std::vector<cplx>(in.amplitudes.size(), cplx(0.0))};

  const auto run_sector = [&](const Sector& s) {
    const long ns = static_cast<long>(s.indices.size());
    std::vector<cplx> x(ns), z(ns);
    bool empty = true;
    for (long k = 0; k < ns; ++k) {
      x[k] = in.amplitudes[s.indices[k]];
      if (x[k] != cplx(0.0)) empty = false;
    }
    if (empty) return;
    dense_matvec_adjoint(Exec::serial, s.vectors.data(), ns, x.data(), z.data());
    phase_scale(Exec::serial, s.eigenvalues.data(), time, z.data(), z.data(), ns);
    dense_matvec(Exec::serial, s.vectors.data(), ns, z.data(), x.data());
    for (long k = 0; k < ns; ++k) out.amplitudes[s.indices[k]] = x[k];
  };

  if (ex == Exec::parallel) {
    const long count = static_cast<long>(sectors_.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) run_sector(sectors_[i]);
  } else {
    for (const auto& s : sectors_) run_sector(s);
  }
  return out;
}

struct EvolverCache::Impl {
  std::mutex mu;
  std::map<std::tuple<int, double, double, double, int>, std::shared_ptr<const Evolver>> entries;
};

EvolverCache::EvolverCache() : impl_(std::make_shared<Impl>()) {}

EvolverCache& EvolverCache::global() {
  static EvolverCache cache;
  return cache;
}

std::shared_ptr<const Evolver> EvolverCache::get(const FockBasis& basis, const CouplingParams& p,
                                                 EigenDriver driver) {
  const auto key = std::make_tuple(basis.n_max(), p.g1, p.gm1, p.delta, static_cast<int>(driver));
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->entries.find(key);
    if (it != impl_->entries.end()) return it->second;
  }
  auto built = std::make_shared<const Evolver>(basis, p, driver);
  std::lock_guard<std::mutex> lock(impl_->mu);
  auto [it, inserted] = impl_->entries.emplace(key, built);
  return it->second;
}

void EvolverCache::clear() {
  std::lock_guard<std::mutex> lock(impl_->mu);
  impl_->entries.clear();
}

namespace {

void check_tail(const TruncatedState& state, const EvolveOptions& opt, const char* stage) {
  const double tail = state.tail_mass();
  if (tail < opt.tail_tol) return;
  const std::string msg = std::string(stage) + " tail mass " + format_sig17(tail) +
                          " reaches the truncation tolerance " + format_sig17(opt.tail_tol);
  if (opt.strict) throw TruncationError(msg);
  if (opt.warning_sink != nullptr) opt.warning_sink->push_back(msg);
}

}  // namespace

TruncatedState evolve(const TruncatedState& in, const CouplingParams& p, const EvolveOptions& opt) {
  p.validate();
  check_tail(in, opt, "input");
  std::shared_ptr<const Evolver> cached;
  const Evolver* ev = nullptr;
  std::unique_ptr<Evolver> fresh;
  if (opt.use_cache) {
    cached = EvolverCache::global().get(in.basis, p, opt.driver);
    ev = cached.get();
  } else {
    fresh = std::make_unique<Evolver>(in.basis, p, opt.driver);
    ev = fresh.get();
  }
  TruncatedState out = ev->apply(in, p.time, opt.exec);
  check_tail(out, opt, "output");
  return out;
}

StateEnsemble evolve(const StateEnsemble& in, const CouplingParams& p, const EvolveOptions& opt) {
  in.validate();
  StateEnsemble out;
  out.members.reserve(in.members.size());
  for (const auto& m : in.members) {
    out.members.push_back({m.weight, evolve(m.state, p, opt)});
  }
  return out;
}

FullSpaceSystem full_space_eigensystem(const FockBasis& basis, const CouplingParams& p,
                                       EigenDriver driver) {
  const long dim = basis.dim();
  if (dim > 2197) {
    throw ResourceError("full-space eigendecomposition limited to n_max <= 12; use the sectored path");
  }
  const CsrMatrix h = hamiltonian_matrix(basis, p);
  FullSpaceSystem sys{basis, {}, std::vector<cplx>(dim * dim, cplx(0.0))};
  for (long i = 0; i < dim; ++i) {
    for (long k = h.row_ptr[i]; k < h.row_ptr[i + 1]; ++k) {
      sys.vectors[i + h.col_idx[k] * dim] = h.values[k];
    }
  }
  hermitian_eigensystem(sys.vectors, sys.eigenvalues, dim, driver);
  return sys;
}

TruncatedState full_space_apply(const FullSpaceSystem& sys, const TruncatedState& in, double time,
                                Exec ex) {
  if (!(in.basis == sys.basis)) throw BasisMismatchError("state basis does not match the eigensystem");
  const long dim = sys.basis.dim();
  TruncatedState out{sys.basis, std::vector<cplx>(dim)};
  std::vector<cplx> z(dim);
  dense_matvec_adjoint(ex, sys.vectors.data(), dim, in.amplitudes.data(), z.data());
  phase_scale(ex, sys.eigenvalues.data(), time, z.data(), z.data(), dim);
  dense_matvec(ex, sys.vectors.data(), dim, z.data(), out.amplitudes.data());
  return out;
}

TruncatedState evolve_full_space(const TruncatedState& in, const CouplingParams& p,
                                 EigenDriver driver, Exec ex) {
  p.validate();
  return full_space_apply(full_space_eigensystem(in.basis, p, driver), in, p.time, ex);
}

namespace {

class LadderSet {
 public:
  explicit LadderSet(const FockBasis& basis) {
    for (int m = 0; m < kModeCount; ++m) {
      ann_[m] = annihilation_matrix(basis, m);
      cre_[m] = creation_matrix(basis, m);
    }
  }
  const CsrMatrix& get(const LadderOp& op) const { return op.dagger ? cre_[op.mode] : ann_[op.mode]; }

 private:
  CsrMatrix ann_[kModeCount];
  CsrMatrix cre_[kModeCount];
};

const LadderSet& ladder_set(const FockBasis& basis) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const LadderSet>> sets;
  std::lock_guard<std::mutex> lock(mu);
  auto it = sets.find(basis.n_max());
  if (it == sets.end()) {
    it = sets.emplace(basis.n_max(), std::make_shared<const LadderSet>(basis)).first;
  }
  return *it->second;
}

}  // namespace

cplx expectation(const TruncatedState& state, std::span<const LadderOp> ops, Exec ex) {
  const auto& ladders = ladder_set(state.basis);
  std::vector<cplx> y = state.amplitudes;
  std::vector<cplx> scratch(y.size());
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    csr_matvec(ex, ladders.get(*it), y.data(), scratch.data());
    y.swap(scratch);
  }
  return dot(Exec::serial, state.amplitudes.data(), y.data(), static_cast<long>(y.size()));
}

cplx expectation(const StateEnsemble& ensemble, std::span<const LadderOp> ops, Exec ex) {
  ensemble.validate();
  cplx acc = 0.0;
  for (const auto& m : ensemble.members) acc += m.weight * expectation(m.state, ops, ex);
  return acc;
}

nlohmann::json state_to_json(const TruncatedState& state) {
  nlohmann::json amps = nlohmann::json::array();
  for (const auto& a : state.amplitudes) {
    amps.push_back(nlohmann::json::array({a.real(), a.imag()}));
  }
  return nlohmann::json{
      {"n_max", state.basis.n_max()},
      {"layout", "index = n_stokes*(N+1)^2 + n_probe*(N+1) + n_anti"},
      {"amplitudes", std::move(amps)},
  };
}

TruncatedState state_from_json(const nlohmann::json& j) {
  if (!j.contains("n_max") || !j.contains("amplitudes")) {
    throw ValidationError("state document needs 'n_max' and 'amplitudes'");
  }
  FockBasis basis(j.at("n_max").get<int>());
  const auto& amps = j.at("amplitudes");
  if (!amps.is_array() || static_cast<long>(amps.size()) != basis.dim()) {
    throw ValidationError("amplitude array length does not match (N+1)^3");
  }
  TruncatedState state{basis, {}};
  state.amplitudes.reserve(amps.size());
  for (const auto& pair : amps) {
    state.amplitudes.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  }
  return state;
}

}  // namespace raman::fock
