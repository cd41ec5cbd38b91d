#include "spinprec/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spinprec/error.hpp"

namespace spinprec::io {

using json = nlohmann::ordered_json;
using analysis::RunSpec;

namespace {

constexpr const char* known_keys[] = {
    "wavelength_m",  "peak_field_V_per_m", "ellipticity_rad",   "ramp_cycles", "total_cycles",     "theory",
    "n_max",         "rel_tolerance",      "steps_per_cycle",   "samples_per_cycle", "integrator", "target_phase_rad",
    "min_cycles",    "max_cycles",         "analysis_margin_cycles", "edge_threshold", "n_max_limit", "pauli_terms",
};

int line_of_offset(std::string_view text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Line of the first occurrence of "key" as an object key, 0 if absent.
int key_line(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 0 : line_of_offset(text, pos);
}

[[noreturn]] void fail_at(std::string_view text, std::string_view key, const std::string& msg) {
  const int line = key_line(text, key);
  throw ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg);
}

double number(const json& j, std::string_view text, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) fail_at(text, key, std::string(key) + " must be a number");
  return v.get<double>();
}

int integer(const json& j, std::string_view text, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) fail_at(text, key, std::string(key) + " must be an integer");
  return v.get<int>();
}

bool boolean(const json& j, std::string_view text, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) fail_at(text, key, std::string(key) + " must be true or false");
  return v.get<bool>();
}

std::string_view integrator_name(Integrator i) { return i == Integrator::magnus ? "magnus" : "dop853"; }

json config_object(const RunSpec& s) {
  json j;
  j["wavelength_m"] = s.laser.wavelength;
  j["peak_field_V_per_m"] = s.laser.peak_field;
  j["ellipticity_rad"] = s.laser.ellipticity;
  j["ramp_cycles"] = s.laser.ramp_cycles;
  j["total_cycles"] = s.laser.total_cycles;
  j["theory"] = analysis::to_string(s.theory);
  j["n_max"] = s.n_max;
  j["rel_tolerance"] = s.propagation.rel_tol;
  j["integrator"] = integrator_name(s.propagation.integrator);
  j["steps_per_cycle"] = s.propagation.steps_per_cycle;
  j["samples_per_cycle"] = s.propagation.samples_per_cycle;
  j["target_phase_rad"] = s.target_phase;
  j["min_cycles"] = s.min_cycles;
  j["max_cycles"] = s.max_cycles;
  j["analysis_margin_cycles"] = s.analysis_margin_cycles;
  j["edge_threshold"] = s.edge_threshold;
  j["n_max_limit"] = s.n_max_limit;
  if (s.pauli_terms) {
    j["pauli_terms"] = {{"A_squared", s.pauli_terms->include_A_squared},
                        {"sigma_dot_B", s.pauli_terms->include_sigma_dot_B},
                        {"E_cross_A", s.pauli_terms->include_E_cross_A},
                        {"envelope_in_e", s.pauli_terms->envelope_in_e}};
  }
  return j;
}

json manifest_object(const RunSpec& s) {
  json m;
  m["tool"] = tool_name;
  m["version"] = tool_version;
  m["config"] = config_object(s);
  json solver;
  solver["theory"] = analysis::to_string(s.theory);
  if (s.theory == analysis::Theory::classical_full) {
    solver["integrator"] = "dop853";
  } else {
    const pauli::Toggles t = s.pauli_terms.value_or(analysis::default_terms(s.theory));
    solver["integrator"] = integrator_name(s.propagation.integrator);
    solver["n_max"] = s.n_max;
    if (s.theory != analysis::Theory::dirac)
      solver["pauli_terms"] = {{"A_squared", t.include_A_squared},
                               {"sigma_dot_B", t.include_sigma_dot_B},
                               {"E_cross_A", t.include_E_cross_A},
                               {"envelope_in_e", t.envelope_in_e}};
  }
  m["solver"] = solver;
  m["units"] = "SI in files; spin columns in units of hbar";
  m["determinism"] = "no random numbers; the same config on the same build reproduces every CSV byte for byte";
  return m;
}

json precession_object(const analysis::PrecessionResult& p) {
  return {{"omega_rad_per_s", p.omega},
          {"omega_uncertainty_rad_per_s", p.omega_uncertainty},
          {"signed_omega_rad_per_s", p.signed_omega},
          {"amplitude_J_s", p.amplitude},
          {"phase_rad", p.phase},
          {"fit_residual", p.fit_residual},
          {"accumulated_phase_rad", p.accumulated_phase},
          {"points", p.points},
          {"method", analysis::to_string(p.method)},
          {"theory", analysis::to_string(p.theory)}};
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunSpec parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const int line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw ConfigError("line 1: configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : known_keys) known = known || key == k;
    if (!known) fail_at(text, key, "unknown key \"" + key + "\"");
  }
  for (const char* key : {"wavelength_m", "peak_field_V_per_m", "ellipticity_rad", "ramp_cycles", "total_cycles",
                          "theory"})
    if (!j.contains(key)) throw ConfigError(std::string("missing required key \"") + key + "\"");

  RunSpec s;
  s.laser.wavelength = number(j, text, "wavelength_m");
  s.laser.peak_field = number(j, text, "peak_field_V_per_m");
  s.laser.ellipticity = number(j, text, "ellipticity_rad");
  s.laser.ramp_cycles = number(j, text, "ramp_cycles");
  s.laser.total_cycles = number(j, text, "total_cycles");
  if (!j["theory"].is_string()) fail_at(text, "theory", "theory must be a string");
  try {
    s.theory = analysis::parse_theory(j["theory"].get<std::string>());
  } catch (const ConfigError& e) {
    fail_at(text, "theory", e.what());
  }
  if (j.contains("n_max")) s.n_max = integer(j, text, "n_max");
  if (j.contains("rel_tolerance")) s.propagation.rel_tol = number(j, text, "rel_tolerance");
  if (j.contains("steps_per_cycle")) s.propagation.steps_per_cycle = integer(j, text, "steps_per_cycle");
  if (j.contains("samples_per_cycle")) s.propagation.samples_per_cycle = integer(j, text, "samples_per_cycle");
  if (j.contains("integrator")) {
    const auto& v = j["integrator"];
    if (v == "magnus") s.propagation.integrator = Integrator::magnus;
    else if (v == "dop853") s.propagation.integrator = Integrator::dop853;
    else fail_at(text, "integrator", "integrator must be \"magnus\" or \"dop853\"");
  }
  if (j.contains("target_phase_rad")) s.target_phase = number(j, text, "target_phase_rad");
  if (j.contains("min_cycles")) s.min_cycles = number(j, text, "min_cycles");
  if (j.contains("max_cycles")) s.max_cycles = number(j, text, "max_cycles");
  if (j.contains("analysis_margin_cycles")) s.analysis_margin_cycles = number(j, text, "analysis_margin_cycles");
  if (j.contains("edge_threshold")) s.edge_threshold = number(j, text, "edge_threshold");
  if (j.contains("n_max_limit")) s.n_max_limit = integer(j, text, "n_max_limit");
  if (j.contains("pauli_terms")) {
    const auto& p = j["pauli_terms"];
    if (!p.is_object()) fail_at(text, "pauli_terms", "pauli_terms must be an object");
    pauli::Toggles t = analysis::default_terms(s.theory);
    for (const auto& [key, value] : p.items()) {
      if (key == "A_squared") t.include_A_squared = boolean(p, text, "A_squared");
      else if (key == "sigma_dot_B") t.include_sigma_dot_B = boolean(p, text, "sigma_dot_B");
      else if (key == "E_cross_A") t.include_E_cross_A = boolean(p, text, "E_cross_A");
      else if (key == "envelope_in_e") t.envelope_in_e = boolean(p, text, "envelope_in_e");
      else fail_at(text, key, "unknown pauli_terms key \"" + key + "\"");
    }
    s.pauli_terms = t;
  }

  // Semantic checks; messages start with the offending key.
  try {
    s.laser.validate();
    s.propagation.validate();
    if (s.pauli_terms) s.pauli_terms->validate();
    if (s.n_max < 1) throw ConfigError("n_max must be at least 1");
    if (s.n_max_limit < s.n_max) throw ConfigError("n_max_limit must not be below n_max");
    if (!(s.target_phase >= 0.0)) throw ConfigError("target_phase_rad must be non-negative");
    if (!(s.min_cycles > 0.0 && s.max_cycles >= s.min_cycles))
      throw ConfigError("max_cycles must be at least min_cycles > 0");
    if (!(s.analysis_margin_cycles >= 0.0)) throw ConfigError("analysis_margin_cycles must be non-negative");
    if (!(s.edge_threshold > 0.0)) throw ConfigError("edge_threshold must be positive");
    if (s.theory == analysis::Theory::classical_full && s.propagation.integrator == Integrator::magnus &&
        j.contains("integrator"))
      throw ConfigError("integrator: the classical solver always uses dop853");
    if ((s.theory == analysis::Theory::pauli_rel || s.theory == analysis::Theory::pauli_nonrel) &&
        s.propagation.integrator == Integrator::dop853)
      throw ConfigError("integrator: the pauli solver supports magnus only");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* k : known_keys)
      if (msg.rfind(k, 0) == 0) fail_at(text, k, msg);
    if (msg.rfind("2 * ramp_cycles", 0) == 0) fail_at(text, "ramp_cycles", msg);
    if (msg.rfind("pauli toggles", 0) == 0) fail_at(text, "sigma_dot_B", msg);
    throw;
  }
  return s;
}

RunSpec load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string config_json(const RunSpec& spec, int indent) { return config_object(spec).dump(indent); }

std::string manifest_json(const RunSpec& spec, int indent) { return manifest_object(spec).dump(indent); }

std::string series_csv(const analysis::RunResult& run) {
  const bool dirac = run.spec.theory == analysis::Theory::dirac;
  std::string out = "# manifest: " + manifest_json(run.spec) + "\n";
  out += dirac ? "t_s,sy_over_hbar,sz_over_hbar,norm,neg_energy_pop\n" : "t_s,sy_over_hbar,sz_over_hbar,norm\n";
  for (const auto& s : run.series) {
    out += g17(s.t) + ',' + g17(s.sy) + ',' + g17(s.sz) + ',' + g17(s.norm);
    if (dirac) out += ',' + g17(s.neg_energy_pop);
    out += '\n';
  }
  return out;
}

std::string run_json(const analysis::RunResult& run) {
  json j;
  j["manifest"] = manifest_object(run.spec);
  if (run.precession) {
    j["precession"] = precession_object(*run.precession);
  } else {
    j["precession"] = nullptr;
    j["extraction_error"] = run.extraction_error;
  }
  j["reference"] = {{"omega_dirac_formula_rad_per_s", analysis::omega_dirac_formula(run.spec.laser)},
                    {"omega_pauli_formula_rad_per_s", analysis::omega_pauli_formula(run.spec.laser)}};
  j["stats"] = {{"steps", run.stats.steps},
                {"rejected", run.stats.rejected},
                {"evaluations", run.stats.evaluations},
                {"max_norm_drift", run.stats.max_norm_drift},
                {"final_negative_energy_population", run.stats.final_negative_population},
                {"max_edge_population", run.stats.max_edge_population},
                {"snapshots", run.series.size()}};
  j["timing"] = {{"elapsed_seconds", run.elapsed_seconds}};
  return j.dump(2) + "\n";
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "field") return SweepAxis::field;
  if (name == "ellipticity") return SweepAxis::ellipticity;
  throw ConfigError("sweep axis must be \"field\" or \"ellipticity\"");
}

std::string_view to_string(SweepAxis a) { return a == SweepAxis::field ? "field" : "ellipticity"; }

std::string sweep_csv(const RunSpec& spec, SweepAxis axis, const analysis::SweepOutcome& sweep) {
  std::string out = "# manifest: " + manifest_json(spec) + "\n";
  out += axis == SweepAxis::field ? "peak_field_V_per_m" : "ellipticity_rad";
  out += ",omega_rad_per_s,omega_uncertainty_rad_per_s,fit_residual,accumulated_phase_rad,total_cycles,n_max,status\n";
  const double nan = std::nan("");
  for (const auto& p : sweep.points) {
    const analysis::PrecessionResult* r = p.run && p.run->precession ? &*p.run->precession : nullptr;
    out += g17(p.value) + ',' + g17(r ? r->omega : nan) + ',' + g17(r ? r->omega_uncertainty : nan) + ',' +
           g17(r ? r->fit_residual : nan) + ',' + g17(r ? r->accumulated_phase : nan) + ',' +
           g17(p.run ? p.run->spec.laser.total_cycles : nan) + ',' + std::to_string(p.run ? p.run->spec.n_max : 0) +
           ',' + (p.ok() ? "ok" : "failed") + '\n';
  }
  return out;
}

std::string sweep_json(const RunSpec& spec, SweepAxis axis, const analysis::SweepOutcome& sweep) {
  json j;
  j["manifest"] = manifest_object(spec);
  j["axis"] = to_string(axis);
  json pts = json::array();
  double elapsed = 0.0;
  for (const auto& p : sweep.points) {
    json e;
    e["value"] = p.value;
    if (p.run && p.run->precession) e["precession"] = precession_object(*p.run->precession);
    if (p.run) {
      e["total_cycles"] = p.run->spec.laser.total_cycles;
      e["n_max"] = p.run->spec.n_max;
      e["max_norm_drift"] = p.run->stats.max_norm_drift;
      elapsed += p.run->elapsed_seconds;
    }
    if (!p.ok()) e["error"] = p.error;
    pts.push_back(e);
  }
  j["points"] = pts;
  j["complete"] = sweep.complete();
  try {
    if (axis == SweepAxis::field) {
      const analysis::ScalingFit f = analysis::scaling_of(sweep);
      j["scaling_fit"] = {{"exponent", f.exponent},
                          {"exponent_uncertainty", f.exponent_uncertainty},
                          {"prefactor", f.prefactor},
                          {"r_squared", f.r_squared},
                          {"field_points", f.field_points}};
    } else {
      json curve = json::array();
      for (const auto& c : analysis::ellipticity_curve(sweep))
        curve.push_back({{"eta_rad", c.eta}, {"ratio", c.ratio}, {"fit_residual", c.residual}, {"sin_eta", std::sin(c.eta)}});
      j["ellipticity_curve"] = curve;
    }
  } catch (const FitError& e) {
    j["fit_error"] = e.what();
  }
  j["timing"] = {{"solver_seconds", elapsed}};
  return j.dump(2) + "\n";
}

std::string bounds_json(double wavelength, double n_cycles) {
  const analysis::Bounds b = analysis::experimental_bounds(wavelength, n_cycles);
  const analysis::CoincidencePoint c = analysis::coincidence_point(n_cycles);
  json j;
  j["wavelength_m"] = wavelength;
  j["n_cycles"] = n_cycles;
  j["e_min_V_per_m"] = b.e_min;
  j["e_max_V_per_m"] = b.e_max;
  j["feasible"] = b.feasible;
  j["intensity_min_W_per_cm2"] = b.intensity_min;
  j["intensity_max_W_per_cm2"] = b.intensity_max;
  j["coincidence"] = {{"wavelength_m", c.wavelength}, {"field_V_per_m", c.field}, {"intensity_W_per_cm2", c.intensity}};
  return j.dump(2) + "\n";
}

std::string validation_json(const RunSpec& spec) {
  const analysis::ValidityReport v = analysis::perturbative_validity(spec.laser);
  const RunSpec planned = analysis::plan(spec);
  json j;
  j["valid"] = true;
  j["config"] = config_object(spec);
  j["perturbative"] = {{"recoil_bound", v.recoil_bound},
                       {"energy_bound", v.energy_bound},
                       {"recoil_ratio", v.recoil_ratio},
                       {"energy_ratio", v.energy_ratio}};
  j["omega_dirac_formula_rad_per_s"] = analysis::omega_dirac_formula(spec.laser);
  j["omega_pauli_formula_rad_per_s"] = analysis::omega_pauli_formula(spec.laser);
  j["planned_total_cycles"] = planned.laser.total_cycles;
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << content;
  if (!f) throw IoError("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace spinprec::io
