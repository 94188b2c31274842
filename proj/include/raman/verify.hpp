#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "raman/states.hpp"

namespace raman::verify {

// One row of the verification suite: a numbered check with its worst observed
// residual and the tolerance it was held to. Wall time is reported on stdout
// but kept out of the JSON payload so reruns are byte-identical.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double max_residual = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string detail;
  std::vector<std::string> warnings;
};

struct VerifyOptions {
  int n_max = 10;
  double tail_tol = 1e-10;
  bool strict = false;
  std::uint64_t seed = 20250817ull;
  Exec exec = default_exec();
  fock::EigenDriver driver = fock::EigenDriver::automatic;
  int t_points = 16;  // grid on [0, pi] for the moment-equivalence sweeps
};

// Measures a full MomentSet from a weighted ket list by brute-force
// expectation values. The vacuum_sidebands flag is the caller's declaration
// about the state class and is stored, not inferred.
MomentSet measure_moments(const fock::StateEnsemble& ensemble, int n_top, bool vacuum_sidebands,
                          Exec ex);

// <b>, <b^2>, <b^dag b> of one mode, measured brute-force.
ProbeQuadratureMoments measure_mode_quadrature(const fock::StateEnsemble& ensemble, int mode,
                                               Exec ex);

// Runs one numbered check (1..10). Unknown ids throw ValidationError.
CriterionResult run_criterion(int id, const VerifyOptions& opt);

// Runs every check in order.
std::vector<CriterionResult> run_all(const VerifyOptions& opt);

constexpr int kCriterionCount = 10;

nlohmann::json to_json(const std::vector<CriterionResult>& results);

// One human-readable line per result, e.g. for the CLI and the test driver.
std::string format_line(const CriterionResult& r);

}  // namespace raman::verify
