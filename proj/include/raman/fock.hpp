#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "raman/config.hpp"
#include "raman/kernels.hpp"

namespace raman::fock {

// Truncated three-mode photon-number basis. Flat index layout:
//   index = n_stokes * (N+1)^2 + n_probe * (N+1) + n_anti.
class FockBasis {
 public:
  static constexpr int kHardCeiling = 16;

  explicit FockBasis(int n_max);

  int n_max() const { return n_max_; }
  int per_mode_dim() const { return n_max_ + 1; }
  long dim() const;

  long index_of(int n_stokes, int n_probe, int n_anti) const;
  std::array<int, 3> occupations(long index) const;

  bool operator==(const FockBasis& other) const { return n_max_ == other.n_max_; }

 private:
  int n_max_;
};

struct TruncatedState {
  FockBasis basis;
  std::vector<cplx> amplitudes;

  double norm() const;
  // Probability carried by levels with any occupation at the cutoff.
  double tail_mass() const;
  void normalize();
};

// Weighted list of kets; the representation for classical mixtures.
struct StateEnsemble {
  struct Member {
    double weight;
    TruncatedState state;
  };
  std::vector<Member> members;

  void validate() const;  // weights > 0 and summing to 1
};

// Ladder operator of one mode on the truncated space, identity on the others.
CsrMatrix annihilation_matrix(const FockBasis& basis, int mode);
CsrMatrix creation_matrix(const FockBasis& basis, int mode);

// H/hbar assembled from ladder products: detuning on the number operators,
// minus the two probe-sideband exchange terms. Hermitian by construction and
// commuting exactly with the total number operator.
CsrMatrix hamiltonian_matrix(const FockBasis& basis, const CouplingParams& p);

enum class EigenDriver { automatic, lapack, eigen };

bool lapack_available();

// The Hamiltonian never couples different total occupations, so evolution is
// performed per total-photon-number sector; each block gets its own Hermitian
// eigendecomposition. Time enters only through the phases, so one Evolver
// serves every evolution time of its parameter set.
class Evolver {
 public:
  Evolver(const FockBasis& basis, const CouplingParams& p, EigenDriver driver = EigenDriver::automatic);

  TruncatedState apply(const TruncatedState& in, double time, Exec ex) const;

  const FockBasis& basis() const { return basis_; }
  int sector_count() const { return static_cast<int>(sectors_.size()); }
  long max_sector_dim() const;

 private:
  struct Sector {
    std::vector<long> indices;
    std::vector<double> eigenvalues;
    std::vector<cplx> vectors;  // column-major, dim x dim
  };
  FockBasis basis_;
  std::vector<Sector> sectors_;
};

// Read-mostly cache of Evolvers keyed by (n_max, g1, gm1, delta, driver).
class EvolverCache {
 public:
  static EvolverCache& global();
  std::shared_ptr<const Evolver> get(const FockBasis& basis, const CouplingParams& p,
                                     EigenDriver driver = EigenDriver::automatic);
  void clear();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  EvolverCache();
};

struct EvolveOptions {
  double tail_tol = 1e-10;
  bool strict = false;
  Exec exec = default_exec();
  EigenDriver driver = EigenDriver::automatic;
  bool use_cache = true;
  std::vector<std::string>* warning_sink = nullptr;
};

TruncatedState evolve(const TruncatedState& in, const CouplingParams& p, const EvolveOptions& opt = {});
StateEnsemble evolve(const StateEnsemble& in, const CouplingParams& p, const EvolveOptions& opt = {});

// Single eigendecomposition of the whole truncated space; kept as an
// independent cross-check of the sectored path and as a benchmark workload.
// Limited to n_max <= 12 (the sectored path has no such limit).
struct FullSpaceSystem {
  FockBasis basis;
  std::vector<double> eigenvalues;
  std::vector<cplx> vectors;  // column-major, dim x dim
};

FullSpaceSystem full_space_eigensystem(const FockBasis& basis, const CouplingParams& p,
                                       EigenDriver driver = EigenDriver::automatic);
TruncatedState full_space_apply(const FullSpaceSystem& sys, const TruncatedState& in, double time,
                                Exec ex);
TruncatedState evolve_full_space(const TruncatedState& in, const CouplingParams& p,
                                 EigenDriver driver = EigenDriver::automatic,
                                 Exec ex = default_exec());

struct LadderOp {
  int mode;
  bool dagger;
};

// Expectation of a product of ladder operators written left to right in
// operator order (the rightmost factor acts on the ket first). Inner products
// are accumulated serially so results are thread-count independent.
cplx expectation(const TruncatedState& state, std::span<const LadderOp> ops,
                 Exec ex = default_exec());
cplx expectation(const StateEnsemble& ensemble, std::span<const LadderOp> ops,
                 Exec ex = default_exec());

nlohmann::json state_to_json(const TruncatedState& state);
TruncatedState state_from_json(const nlohmann::json& j);

}  // namespace raman::fock
