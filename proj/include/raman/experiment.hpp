#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "raman/config.hpp"
#include "raman/fock.hpp"
#include "raman/states.hpp"

namespace raman {

// One sweep dimension over a reduced parameter. Multiple axes combine as a
// cartesian product, last axis fastest.
struct SweepAxis {
  std::string parameter;  // g1 | gm1 | delta | time
  double from = 0.0;
  double to = 0.0;
  int count = 2;
};

struct OracleSettings {
  int n_max = 10;
  double tail_tol = 1e-10;
  fock::EigenDriver driver = fock::EigenDriver::automatic;
  int t_points = 16;  // t grid used by the verification sweeps
};

struct ExperimentConfig {
  std::string scenario;
  ParameterDocument parameters;
  bool has_parameters = false;
  InputState input;
  bool has_input = false;
  std::vector<SweepAxis> sweep;
  OracleSettings oracle;
  bool strict = false;
  std::uint64_t seed = 20250817ull;
  int phi_points = 720;
  int samples = 0;  // thermal P-function sample size for the mixture scenario
  int n_top = 4;
  bool emit_state = false;  // dump the truncated output ket where meaningful
  nlohmann::json echo;      // the full config document, embedded in the report
};

// Input-state block: {"kind": ..., ...}; complex numbers are [re, im] pairs
// (plain numbers are accepted as real shorthand).
InputState parse_input_state(const nlohmann::json& j);
nlohmann::json to_json(const InputState& in);

// Parses a config document. A non-empty cli_scenario must match the
// document's scenario field when both are present; either alone suffices.
ExperimentConfig load_experiment(const nlohmann::json& doc, const std::string& cli_scenario = "");

// A named table of numeric columns destined for one CSV file.
struct CurveTable {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  nlohmann::json document;
  std::vector<CurveTable> curves;
  int exit_code = 0;
};

// Runs the scenario and assembles the report in memory. Configuration and
// state errors propagate as the library error types; a failing verify
// scenario completes the report and sets exit_code 3.
Report run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

// Writes one CSV per curve table (header row, 17 significant digits) into
// out_dir, records the file names in the document, and adds a warning
// instead when there are no curves. Returns the files written.
std::vector<std::string> emit_plot_data(Report& report, const std::string& out_dir);

// Full pipeline: run, emit plot data, write <out_dir>/report.json. Returns
// the process exit code.
int run_to_directory(const ExperimentConfig& cfg, const std::string& out_dir,
                     std::ostream* progress = nullptr);

}  // namespace raman
