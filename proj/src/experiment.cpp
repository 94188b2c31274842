#include "raman/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#ifdef RAMAN_HAVE_OPENMP
#include <omp.h>
#endif

#include "raman/statistics.hpp"
#include "raman/verify.hpp"
#include "raman/version.hpp"

namespace raman {
namespace {

nlohmann::json cx(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

cplx parse_cplx(const nlohmann::json& v, const std::string& field) {
  if (v.is_number()) return cplx(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return cplx(v[0].get<double>(), v[1].get<double>());
  }
  throw ValidationError("field '" + field + "' must be a [re, im] pair");
}

double number_field(const nlohmann::json& obj, const std::string& key) {
  if (!obj.contains(key)) throw ValidationError("missing field '" + key + "'");
  if (!obj.at(key).is_number()) throw ValidationError("field '" + key + "' must be a number");
  return obj.at(key).get<double>();
}

int int_field(const nlohmann::json& obj, const std::string& key) {
  if (!obj.contains(key)) throw ValidationError("missing field '" + key + "'");
  if (!obj.at(key).is_number_integer()) {
    throw ValidationError("field '" + key + "' must be an integer");
  }
  return obj.at(key).get<int>();
}

int int_field_or(const nlohmann::json& obj, const std::string& key, int fallback) {
  return obj.contains(key) ? int_field(obj, key) : fallback;
}

const std::set<std::string>& known_scenarios() {
  static const std::set<std::string> s = {"propagator-dump", "statistics", "squeezing", "fock",
                                          "coherent",        "mixture",    "verify",    "sweep"};
  return s;
}

}  // namespace

InputState parse_input_state(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ValidationError("input-state block needs a string field 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  InputState in;
  if (kind == "vacuum") {
    in.kind = InputState::Kind::vacuum;
  } else if (kind == "coherent") {
    in.kind = InputState::Kind::coherent;
    if (!j.contains("alpha")) throw ValidationError("coherent input needs 'alpha'");
    in.alpha = parse_cplx(j.at("alpha"), "alpha");
  } else if (kind == "fock") {
    in.kind = InputState::Kind::fock;
    in.n = int_field(j, "n");
  } else if (kind == "squeezed") {
    in.kind = InputState::Kind::squeezed;
    in.r = number_field(j, "r");
    in.theta = j.contains("theta") ? number_field(j, "theta") : 0.0;
    in.squeezed_cutoff = int_field_or(j, "cutoff", in.squeezed_cutoff);
  } else if (kind == "thermal") {
    in.kind = InputState::Kind::thermal;
    in.nbar = number_field(j, "nbar");
    in.thermal_cutoff = int_field_or(j, "cutoff", in.thermal_cutoff);
  } else if (kind == "mixture") {
    in.kind = InputState::Kind::mixture;
    if (!j.contains("components") || !j.at("components").is_array()) {
      throw ValidationError("mixture input needs a 'components' array");
    }
    for (const auto& c : j.at("components")) {
      CoherentMixture::Component comp;
      comp.weight = number_field(c, "weight");
      if (!c.contains("alpha") || !c.at("alpha").is_array() || c.at("alpha").size() != 3) {
        throw ValidationError("mixture component needs 'alpha' as three [re, im] pairs");
      }
      for (int q = 0; q < kModeCount; ++q) {
        comp.point.alpha[q] = parse_cplx(c.at("alpha")[static_cast<size_t>(q)], "alpha");
      }
      in.mixture.components.push_back(comp);
    }
    in.mixture.validate();
  } else {
    throw ValidationError("unknown input-state kind '" + kind + "'");
  }
  return in;
}

nlohmann::json to_json(const InputState& in) {
  nlohmann::json j;
  switch (in.kind) {
    case InputState::Kind::vacuum:
      j["kind"] = "vacuum";
      break;
    case InputState::Kind::coherent:
      j["kind"] = "coherent";
      j["alpha"] = cx(in.alpha);
      break;
    case InputState::Kind::fock:
      j["kind"] = "fock";
      j["n"] = in.n;
      break;
    case InputState::Kind::squeezed:
      j["kind"] = "squeezed";
      j["r"] = in.r;
      j["theta"] = in.theta;
      j["cutoff"] = in.squeezed_cutoff;
      break;
    case InputState::Kind::thermal:
      j["kind"] = "thermal";
      j["nbar"] = in.nbar;
      j["cutoff"] = in.thermal_cutoff;
      break;
    case InputState::Kind::mixture: {
      j["kind"] = "mixture";
      nlohmann::json comps = nlohmann::json::array();
      for (const auto& c : in.mixture.components) {
        comps.push_back({{"weight", c.weight},
                         {"alpha", {cx(c.point.alpha[0]), cx(c.point.alpha[1]),
                                    cx(c.point.alpha[2])}}});
      }
      j["components"] = comps;
      break;
    }
  }
  return j;
}

ExperimentConfig load_experiment(const nlohmann::json& doc, const std::string& cli_scenario) {
  if (!doc.is_object()) throw ValidationError("config document must be a JSON object");
  ExperimentConfig cfg;
  std::string doc_scenario = doc.value("scenario", std::string());
  if (!cli_scenario.empty() && !doc_scenario.empty() && cli_scenario != doc_scenario) {
    throw ValidationError("scenario mismatch: command line says '" + cli_scenario +
                          "' but the config says '" + doc_scenario + "'");
  }
  cfg.scenario = cli_scenario.empty() ? doc_scenario : cli_scenario;
  if (cfg.scenario.empty()) {
    throw ValidationError("no scenario given (config field or command line)");
  }
  if (!known_scenarios().count(cfg.scenario)) {
    std::string names;
    for (const auto& s : known_scenarios()) names += (names.empty() ? "" : ", ") + s;
    throw ValidationError("unknown scenario '" + cfg.scenario + "'; expected one of " + names);
  }
  if (doc.contains("parameters")) {
    cfg.parameters = parse_parameters(doc.at("parameters"));
    cfg.has_parameters = true;
  }
  if (doc.contains("input")) {
    cfg.input = parse_input_state(doc.at("input"));
    cfg.has_input = true;
  }
  if (doc.contains("sweep")) {
    if (!doc.at("sweep").is_array() || doc.at("sweep").empty()) {
      throw ValidationError("'sweep' must be a non-empty array of axes");
    }
    for (const auto& a : doc.at("sweep")) {
      SweepAxis axis;
      if (!a.contains("parameter") || !a.at("parameter").is_string()) {
        throw ValidationError("sweep axis needs a string field 'parameter'");
      }
      axis.parameter = a.at("parameter").get<std::string>();
      if (axis.parameter != "g1" && axis.parameter != "gm1" && axis.parameter != "delta" &&
          axis.parameter != "time") {
        throw ValidationError("sweep axis parameter '" + axis.parameter +
                              "' is not one of g1, gm1, delta, time");
      }
      axis.from = number_field(a, "from");
      axis.to = number_field(a, "to");
      axis.count = int_field(a, "count");
      if (axis.count < 2) throw ValidationError("sweep axis count must be at least 2");
      if (!std::isfinite(axis.from) || !std::isfinite(axis.to)) {
        throw ValidationError("sweep axis range must be finite");
      }
      cfg.sweep.push_back(axis);
    }
  }
  if (doc.contains("oracle")) {
    const auto& o = doc.at("oracle");
    cfg.oracle.n_max = int_field_or(o, "n_max", cfg.oracle.n_max);
    if (o.contains("tail_tol")) cfg.oracle.tail_tol = number_field(o, "tail_tol");
    cfg.oracle.t_points = int_field_or(o, "t_points", cfg.oracle.t_points);
    if (cfg.oracle.t_points < 2) throw ValidationError("oracle t_points must be at least 2");
    if (o.contains("driver")) {
      const std::string d = o.at("driver").get<std::string>();
      if (d == "automatic") {
        cfg.oracle.driver = fock::EigenDriver::automatic;
      } else if (d == "lapack") {
        cfg.oracle.driver = fock::EigenDriver::lapack;
      } else if (d == "eigen") {
        cfg.oracle.driver = fock::EigenDriver::eigen;
      } else {
        throw ValidationError("unknown eigensolver driver '" + d + "'");
      }
    }
  }
  if (doc.contains("strict")) {
    if (!doc.at("strict").is_boolean()) throw ValidationError("'strict' must be a boolean");
    cfg.strict = doc.at("strict").get<bool>();
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_integer()) throw ValidationError("'seed' must be an integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  cfg.phi_points = int_field_or(doc, "phi_points", cfg.phi_points);
  if (cfg.phi_points < 4) throw ValidationError("'phi_points' must be at least 4");
  cfg.samples = int_field_or(doc, "samples", cfg.samples);
  if (cfg.samples < 0) throw ValidationError("'samples' must be non-negative");
  cfg.n_top = int_field_or(doc, "n_top", cfg.n_top);
  if (cfg.n_top < 1 || cfg.n_top > 8) throw ValidationError("'n_top' must be between 1 and 8");
  if (doc.contains("emit_state")) {
    if (!doc.at("emit_state").is_boolean()) {
      throw ValidationError("'emit_state' must be a boolean");
    }
    cfg.emit_state = doc.at("emit_state").get<bool>();
  }
  cfg.echo = doc;
  cfg.echo["scenario"] = cfg.scenario;
  cfg.echo["seed"] = cfg.seed;  // the seed is recorded even when defaulted
  return cfg;
}

namespace {

CouplingDerivation resolve_required(const ExperimentConfig& cfg) {
  if (!cfg.has_parameters) {
    throw ValidationError("scenario '" + cfg.scenario + "' needs a 'parameters' block");
  }
  return cfg.parameters.resolve(cfg.strict);
}

const InputState& input_required(const ExperimentConfig& cfg) {
  if (!cfg.has_input) {
    throw ValidationError("scenario '" + cfg.scenario + "' needs an 'input' block");
  }
  return cfg.input;
}

nlohmann::json matrix_json(const PropagatorMatrix& u) {
  nlohmann::json rows = nlohmann::json::array();
  for (int a = 0; a < kModeCount; ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 0; b < kModeCount; ++b) row.push_back(cx(u.u[a][b]));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json weights_json(const std::array<double, 3>& w) {
  return {{"stokes", w[kStokes]}, {"probe", w[kProbe]}, {"anti_stokes", w[kAntiStokes]}};
}

// Per-mode g^(n); null where the correlation is undefined (empty mode).
nlohmann::json guarded_mode_autocorrelation(const MomentSet& m, int order) {
  nlohmann::json arr = nlohmann::json::array();
  for (int q = 0; q < kModeCount; ++q) {
    if (m.occupation(q) > 0.0 && m.has_number_moment(q, order)) {
      arr.push_back(mode_autocorrelation(m, q, order));
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

nlohmann::json payload_propagator(const CouplingParams& p) {
  PropagatorMatrix u = build_propagator(p);
  ModeDecomposition dec = decompose_modes(p);
  nlohmann::json payload;
  payload["matrix"] = matrix_json(u);
  payload["unitarity_defect"] = u.unitarity_defect();
  payload["transfer_weights"] = weights_json(transfer_weights(p));
  payload["reference_phase"] = reference_phase(u);
  payload["mode_decomposition"] = {
      {"coupled_weights", dec.coupled_weights},
      {"uncoupled_weights", dec.uncoupled_weights},
      {"normal_weights", {dec.normal_weights[0], dec.normal_weights[1]}},
      {"frequencies", {{"uncoupled", dec.frequencies[0]},
                       {"plus", dec.frequencies[1]},
                       {"minus", dec.frequencies[2]}}}};
  return payload;
}

nlohmann::json moments_json(const MomentSet& m) {
  nlohmann::json j;
  j["first"] = {cx(m.first[0]), cx(m.first[1]), cx(m.first[2])};
  j["occupation"] = {m.occupation(0), m.occupation(1), m.occupation(2)};
  j["total_occupation"] = m.total_occupation();
  nlohmann::json numbers = nlohmann::json::array();
  for (int q = 0; q < kModeCount; ++q) numbers.push_back(m.number[q]);
  j["number_moments"] = numbers;
  if (m.cross_number) {
    j["cross_number"] = {{"stokes_probe", m.cross_number_moment(kStokes, kProbe)},
                         {"stokes_anti", m.cross_number_moment(kStokes, kAntiStokes)},
                         {"probe_anti", m.cross_number_moment(kProbe, kAntiStokes)}};
  }
  return j;
}

nlohmann::json payload_statistics(const ExperimentConfig& cfg, const CouplingParams& p) {
  const InputState& in = input_required(cfg);
  MomentSet m_in = ideal_input_moments(in, cfg.n_top);
  PropagatorMatrix u = build_propagator(p);
  MomentSet out = propagate_moments(m_in, u);
  nlohmann::json payload;
  payload["input"] = moments_json(m_in);
  payload["input"]["state"] = to_json(in);
  payload["output"] = moments_json(out);
  payload["transfer_weights"] = weights_json(transfer_weights(p));
  nlohmann::json shared = nlohmann::json::object();
  for (int order = 2; order <= cfg.n_top; ++order) {
    if (m_in.occupation(kProbe) > 0.0 && m_in.has_number_moment(kProbe, order)) {
      auto c = autocorrelation(m_in.number[kProbe], order);
      shared["g" + std::to_string(order)] = c.value;
    }
  }
  payload["shared_autocorrelation"] = shared;
  for (int order = 2; order <= std::min(cfg.n_top, 4); ++order) {
    payload["g" + std::to_string(order) + "_by_mode"] = guarded_mode_autocorrelation(out, order);
  }
  if (out.cross_number && out.occupation(kStokes) > 0.0 && out.occupation(kProbe) > 0.0 &&
      out.occupation(kAntiStokes) > 0.0) {
    payload["cross_correlation_by_pair"] = {
        {"stokes_probe", pair_cross_correlation(out, kStokes, kProbe)},
        {"stokes_anti", pair_cross_correlation(out, kStokes, kAntiStokes)},
        {"probe_anti", pair_cross_correlation(out, kProbe, kAntiStokes)}};
  }
  payload["conservation_residual"] =
      std::abs(out.total_occupation() - m_in.total_occupation());
  return payload;
}

ProbeQuadratureMoments probe_quadrature_of(const MomentSet& m) {
  ProbeQuadratureMoments q;
  q.mean = m.first[kProbe];
  q.second = m.pair[kProbe][kProbe];
  q.occupation = m.occupation(kProbe);
  return q;
}

nlohmann::json payload_squeezing(const ExperimentConfig& cfg, const CouplingParams& p,
                                 std::vector<CurveTable>* curves) {
  const InputState& in = input_required(cfg);
  MomentSet m_in = ideal_input_moments(in, 2);
  ProbeQuadratureMoments q_in = probe_quadrature_of(m_in);
  SqueezingReport rep = squeezing_transfer(q_in, p, cfg.phi_points);
  nlohmann::json payload;
  payload["input"] = {{"state", to_json(in)},
                      {"occupation", q_in.occupation},
                      {"mean", cx(q_in.mean)},
                      {"second", cx(q_in.second)}};
  payload["transfer_weights"] = weights_json(rep.transfer);
  payload["occupation"] = rep.occupation;
  payload["reference_phase"] = rep.reference_phase;
  nlohmann::json minima = nlohmann::json::array();
  for (int q = 0; q < kModeCount; ++q) {
    minima.push_back({{"mode", mode_name(q)},
                      {"value", rep.curves[q].min_value},
                      {"phase", rep.curves[q].min_phase},
                      {"closed_form_value", rep.curves[q].closed_form_min},
                      {"closed_form_phase", rep.curves[q].closed_form_phase}});
  }
  payload["minima"] = minima;
  payload["normalized_defined"] = rep.normalized_defined;
  payload["route_residual"] = rep.route_residual;
  payload["relation_residual"] = rep.relation_residual;
  CurveTable table;
  table.name = "squeezing";
  table.columns = {"phi", "S_m1", "S_0", "S_p1"};
  const auto& grid = rep.curves[kStokes].phase;
  for (size_t i = 0; i < grid.size(); ++i) {
    table.rows.push_back({grid[i], rep.curves[kStokes].value[i], rep.curves[kProbe].value[i],
                          rep.curves[kAntiStokes].value[i]});
  }
  curves->push_back(std::move(table));
  return payload;
}

nlohmann::json payload_fock(const ExperimentConfig& cfg, const CouplingParams& p) {
  const InputState& in = input_required(cfg);
  if (in.kind != InputState::Kind::fock) {
    throw ValidationError("scenario 'fock' needs an input of kind fock");
  }
  PropagatorMatrix u = build_propagator(p);
  TripartiteFockOutput out = fock_output(in.n, u);
  nlohmann::json payload;
  payload["n"] = out.n;
  nlohmann::json amps = nlohmann::json::array();
  for (int l = 0; l <= out.n; ++l) {
    for (int m = 0; m <= l; ++m) {
      cplx a = out.amplitude(l, m);
      if (std::abs(a) == 0.0) continue;
      auto occ = TripartiteFockOutput::occupations_of(out.n, l, m);
      amps.push_back({{"occupations", occ}, {"amplitude", cx(a)}, {"probability", std::norm(a)}});
    }
  }
  payload["amplitudes"] = amps;
  payload["total_weight"] = out.total_weight();
  payload["weight_deficit"] = std::abs(1.0 - out.total_weight());
  payload["occupation"] = out.occupations();
  nlohmann::json marg = nlohmann::json::array();
  for (int q = 0; q < kModeCount; ++q) marg.push_back(marginal_distribution(out, q));
  payload["marginals"] = marg;
  auto wit = separability_witness(out);
  nlohmann::json witness = {{"verdict", separability_name(wit.verdict)}, {"note", wit.note}};
  if (wit.bipartition_purity) witness["bipartition_purity"] = *wit.bipartition_purity;
  payload["witness"] = witness;
  if (cfg.emit_state) {
    fock::FockBasis basis(cfg.oracle.n_max);
    payload["state"] = fock::state_to_json(to_truncated(out, basis));
  }
  return payload;
}

nlohmann::json payload_coherent(const ExperimentConfig& cfg, const CouplingParams& p) {
  const InputState& in = input_required(cfg);
  if (in.kind != InputState::Kind::coherent && in.kind != InputState::Kind::vacuum) {
    throw ValidationError("scenario 'coherent' needs an input of kind coherent (or vacuum)");
  }
  CoherentTriple triple;
  triple.alpha[kProbe] = in.kind == InputState::Kind::coherent ? in.alpha : cplx(0.0, 0.0);
  PropagatorMatrix u = build_propagator(p);
  CoherentTriple out = evolve_coherent(triple, u);
  nlohmann::json payload;
  payload["alpha_in"] = {cx(triple.alpha[0]), cx(triple.alpha[1]), cx(triple.alpha[2])};
  payload["alpha_out"] = {cx(out.alpha[0]), cx(out.alpha[1]), cx(out.alpha[2])};
  payload["occupation"] = {std::norm(out.alpha[0]), std::norm(out.alpha[1]),
                           std::norm(out.alpha[2])};
  payload["total_occupation"] = out.photon_number();
  payload["conservation_residual"] = std::abs(out.photon_number() - triple.photon_number());
  if (cfg.emit_state) {
    fock::FockBasis basis(cfg.oracle.n_max);
    double discarded = 0.0;
    payload["state"] = fock::state_to_json(coherent_product_state(basis, out, &discarded));
    payload["state_truncation_discarded"] = discarded;
  }
  return payload;
}

nlohmann::json payload_mixture(const ExperimentConfig& cfg, const CouplingParams& p,
                               std::vector<std::string>* warnings) {
  const InputState& in = input_required(cfg);
  CoherentMixture mix;
  if (in.kind == InputState::Kind::mixture) {
    mix = in.mixture;
  } else if (in.kind == InputState::Kind::thermal && cfg.samples > 0) {
    mix = sample_thermal_mixture(in.nbar, cfg.samples, cfg.seed);
  } else {
    throw ValidationError(
        "scenario 'mixture' needs a mixture input, or a thermal input with samples > 0");
  }
  PropagatorMatrix u = build_propagator(p);
  CoherentMixture transported = transform_mixture(mix, u);
  nlohmann::json payload;
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : transported.components) {
    comps.push_back({{"weight", c.weight},
                     {"alpha", {cx(c.point.alpha[0]), cx(c.point.alpha[1]),
                                cx(c.point.alpha[2])}}});
  }
  payload["components"] = comps;
  bool probe_only = true;
  for (const auto& c : mix.components) {
    if (c.point.alpha[kStokes] != cplx(0.0, 0.0) || c.point.alpha[kAntiStokes] != cplx(0.0, 0.0)) {
      probe_only = false;
    }
  }
  if (probe_only) {
    std::vector<ProbePointMass> points;
    for (const auto& c : mix.components) points.push_back({c.weight, c.point.alpha[kProbe]});
    PReduction red = vacuum_sideband_p_reduction(points, u);
    payload["p_reduction"] = {
        {"line_direction", {cx(red.line_direction[0]), cx(red.line_direction[1]),
                            cx(red.line_direction[2])}},
        {"max_delta_residual", red.max_delta_residual}};
  } else {
    warnings->push_back(
        "input mixture occupies the sidebands; the probe-line P reduction was skipped");
  }
  auto wit = separability_witness(transported);
  payload["witness"] = {{"verdict", separability_name(wit.verdict)}, {"note", wit.note}};
  MomentSet m_in = mixture_moments(mix, cfg.n_top);
  MomentSet m_out = mixture_moments(transported, cfg.n_top);
  payload["input_moments"] = moments_json(m_in);
  payload["output_moments"] = moments_json(m_out);
  payload["conservation_residual"] =
      std::abs(m_out.total_occupation() - m_in.total_occupation());
  if (m_in.occupation(kProbe) > 0.0 && m_in.has_number_moment(kProbe, 2)) {
    payload["shared_autocorrelation"] = {
        {"g2", autocorrelation(m_in.number[kProbe], 2).value}};
  }
  return payload;
}

nlohmann::json payload_verify(const ExperimentConfig& cfg, std::ostream* progress,
                              int* exit_code) {
  verify::VerifyOptions opt;
  opt.n_max = cfg.oracle.n_max;
  opt.tail_tol = cfg.oracle.tail_tol;
  opt.strict = cfg.strict;
  opt.seed = cfg.seed;
  opt.driver = cfg.oracle.driver;
  opt.t_points = cfg.oracle.t_points;
  std::vector<verify::CriterionResult> results;
  results.reserve(verify::kCriterionCount);
  for (int id = 1; id <= verify::kCriterionCount; ++id) {
    verify::CriterionResult r = verify::run_criterion(id, opt);
    if (progress) *progress << verify::format_line(r) << std::endl;
    results.push_back(std::move(r));
  }
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  nlohmann::json payload;
  payload["criteria"] = verify::to_json(results);
  payload["passed"] = verify::kCriterionCount - failed;
  payload["failed"] = failed;
  if (failed > 0) *exit_code = 3;
  return payload;
}

struct SweepGrid {
  std::vector<SweepAxis> axes;
  std::vector<int> strides;
  long total = 1;

  double axis_value(size_t axis, long flat) const {
    long idx = (flat / strides[axis]) % axes[axis].count;
    const SweepAxis& a = axes[axis];
    return a.from + (a.to - a.from) * static_cast<double>(idx) / (a.count - 1);
  }
};

SweepGrid make_grid(const std::vector<SweepAxis>& axes) {
  SweepGrid g;
  g.axes = axes;
  g.strides.assign(axes.size(), 1);
  for (size_t i = axes.size(); i-- > 0;) {
    g.strides[i] = static_cast<int>(g.total);
    g.total *= axes[i].count;
  }
  if (g.total > 2'000'000) throw ResourceError("sweep grid exceeds 2e6 points");
  return g;
}

nlohmann::json payload_sweep(const ExperimentConfig& cfg, const CouplingParams& base,
                             std::vector<CurveTable>* curves) {
  const InputState& in = input_required(cfg);
  if (cfg.sweep.empty()) throw ValidationError("scenario 'sweep' needs a 'sweep' block");
  MomentSet m_in = ideal_input_moments(in, std::max(cfg.n_top, 2));
  if (m_in.occupation(kProbe) <= 0.0) {
    throw UndefinedCorrelationError("sweep input carries no probe photons; g2 is undefined");
  }
  double total_in = m_in.total_occupation();
  SweepGrid grid = make_grid(cfg.sweep);
  std::vector<std::string> axis_names;
  for (const auto& a : cfg.sweep) axis_names.push_back(a.parameter == "time" ? "t" : a.parameter);

  const size_t n_axes = cfg.sweep.size();
  std::vector<std::vector<double>> rows(static_cast<size_t>(grid.total));
  std::vector<double> conservation(static_cast<size_t>(grid.total), 0.0);
  // Independent points, written by index: safe and deterministic in parallel.
#ifdef RAMAN_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long flat = 0; flat < grid.total; ++flat) {
    CouplingParams p = base;
    std::vector<double> row(n_axes + 4);
    for (size_t a = 0; a < n_axes; ++a) {
      double v = grid.axis_value(a, flat);
      row[a] = v;
      if (cfg.sweep[a].parameter == "g1") p.g1 = v;
      if (cfg.sweep[a].parameter == "gm1") p.gm1 = v;
      if (cfg.sweep[a].parameter == "delta") p.delta = v;
      if (cfg.sweep[a].parameter == "time") p.time = v;
    }
    p.validate();
    MomentSet out = propagate_moments(m_in, build_propagator(p));
    row[n_axes + 0] = out.occupation(kStokes);
    row[n_axes + 1] = out.occupation(kProbe);
    row[n_axes + 2] = out.occupation(kAntiStokes);
    // g2 read off the most occupied mode: always well conditioned, and the
    // multiplexing identity makes the choice irrelevant.
    int best = 0;
    for (int q = 1; q < kModeCount; ++q) {
      if (out.occupation(q) > out.occupation(best)) best = q;
    }
    row[n_axes + 3] = mode_autocorrelation(out, best, 2);
    conservation[static_cast<size_t>(flat)] = std::abs(out.total_occupation() - total_in);
    rows[static_cast<size_t>(flat)] = std::move(row);
  }

  CurveTable combined;
  combined.name = "sweep";
  combined.columns = axis_names;
  combined.columns.insert(combined.columns.end(), {"n_m1", "n_0", "n_p1", "g2"});
  combined.rows = rows;
  const std::array<const char*, 4> observables = {"n_m1", "n_0", "n_p1", "g2"};
  for (size_t obs = 0; obs < observables.size(); ++obs) {
    CurveTable t;
    t.name = observables[obs];
    t.columns = axis_names;
    t.columns.push_back(observables[obs]);
    for (const auto& row : rows) {
      std::vector<double> r(row.begin(), row.begin() + static_cast<long>(n_axes));
      r.push_back(row[n_axes + obs]);
      t.rows.push_back(std::move(r));
    }
    curves->push_back(std::move(t));
  }
  curves->push_back(std::move(combined));

  double worst = 0.0;
  for (double c : conservation) worst = std::max(worst, c);
  nlohmann::json payload;
  payload["points"] = grid.total;
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : cfg.sweep) {
    axes.push_back(
        {{"parameter", a.parameter}, {"from", a.from}, {"to", a.to}, {"count", a.count}});
  }
  payload["axes"] = axes;
  payload["input"] = to_json(in);
  payload["total_occupation_in"] = total_in;
  payload["conservation_max_residual"] = worst;
  if (m_in.has_number_moment(kProbe, 2)) {
    payload["shared_autocorrelation"] = {
        {"g2", autocorrelation(m_in.number[kProbe], 2).value}};
  }
  return payload;
}

std::string csv_line(const std::vector<double>& row) {
  std::string line;
  for (size_t i = 0; i < row.size(); ++i) {
    if (i) line += ',';
    line += format_sig17(row[i]);
  }
  return line;
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  Report rep;
  rep.document["schema_version"] = kSchemaVersion;
  rep.document["generator"] = {{"name", "raman-multiplex"}, {"version", kVersion}};
  rep.document["scenario"] = cfg.scenario;
  rep.document["config"] = cfg.echo;
  std::vector<std::string> warnings;

  if (cfg.scenario == "verify") {
    rep.document["parameters"] = nullptr;  // the suite scans its own parameter sets
    rep.document["payload"] = payload_verify(cfg, progress, &rep.exit_code);
  } else {
    CouplingDerivation derived = resolve_required(cfg);
    warnings = derived.warnings;
    append_validity_warning(derived.params, &warnings);
    rep.document["parameters"] = to_json(derived.params);
    const CouplingParams& p = derived.params;
    if (cfg.scenario == "propagator-dump") {
      rep.document["payload"] = payload_propagator(p);
    } else if (cfg.scenario == "statistics") {
      rep.document["payload"] = payload_statistics(cfg, p);
    } else if (cfg.scenario == "squeezing") {
      rep.document["payload"] = payload_squeezing(cfg, p, &rep.curves);
    } else if (cfg.scenario == "fock") {
      rep.document["payload"] = payload_fock(cfg, p);
    } else if (cfg.scenario == "coherent") {
      rep.document["payload"] = payload_coherent(cfg, p);
    } else if (cfg.scenario == "mixture") {
      rep.document["payload"] = payload_mixture(cfg, p, &warnings);
    } else if (cfg.scenario == "sweep") {
      rep.document["payload"] = payload_sweep(cfg, p, &rep.curves);
    }
  }
  rep.document["warnings"] = warnings;
  rep.document["files"] = nlohmann::json::array();
  return rep;
}

std::vector<std::string> emit_plot_data(Report& report, const std::string& out_dir) {
  std::vector<std::string> files;
  if (report.curves.empty()) {
    report.document["warnings"].push_back("no curve payload; no plot files written");
    return files;
  }
  for (const auto& table : report.curves) {
    std::filesystem::path path = std::filesystem::path(out_dir) / (table.name + ".csv");
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    std::string header;
    for (size_t i = 0; i < table.columns.size(); ++i) {
      if (i) header += ',';
      header += table.columns[i];
    }
    f << header << '\n';
    for (const auto& row : table.rows) f << csv_line(row) << '\n';
    if (!f.good()) throw IoError("failed while writing '" + path.string() + "'");
    files.push_back(table.name + ".csv");
  }
  report.document["files"] = files;
  return files;
}

int run_to_directory(const ExperimentConfig& cfg, const std::string& out_dir,
                     std::ostream* progress) {
  Report rep = run_experiment(cfg, progress);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
  emit_plot_data(rep, out_dir);
  std::filesystem::path report_path = std::filesystem::path(out_dir) / "report.json";
  std::ofstream f(report_path);
  if (!f) throw IoError("cannot open '" + report_path.string() + "' for writing");
  f << rep.document.dump(2) << '\n';
  if (!f.good()) throw IoError("failed while writing '" + report_path.string() + "'");
  return rep.exit_code;
}

}  // namespace raman
