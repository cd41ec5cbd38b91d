#include "spinprec/spinprec.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "spinprec/analysis.hpp"
#include "spinprec/error.hpp"
#include "spinprec/io.hpp"

struct spinprec_config {
  spinprec::analysis::RunSpec spec;
};

struct spinprec_run {
  spinprec::analysis::RunResult result;
};

struct spinprec_sweep {
  spinprec::analysis::RunSpec spec;
  spinprec::io::SweepAxis axis;
  spinprec::analysis::SweepOutcome outcome;
};

namespace {

using namespace spinprec;

thread_local std::string last_error;

spinprec_status set_error(spinprec_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
spinprec_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const Error& e) {
    return set_error(static_cast<spinprec_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SPINPREC_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SPINPREC_E_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define SPINPREC_REQUIRE(cond, msg) \
  if (!(cond)) return set_error(SPINPREC_E_USAGE, msg)

LaserConfig laser(double wavelength, double field, double eta) {
  LaserConfig c;
  c.wavelength = wavelength;
  c.peak_field = field;
  c.ellipticity = eta;
  c.validate();
  return c;
}

}  // namespace

extern "C" {

const char* spinprec_version(void) { return io::tool_version.data(); }

const char* spinprec_last_error(void) { return last_error.c_str(); }

void spinprec_string_free(char* s) { delete[] s; }

spinprec_status spinprec_config_parse(const char* json_text, spinprec_config** out) {
  SPINPREC_REQUIRE(json_text && out, "spinprec_config_parse: null argument");
  return guarded([&] {
    *out = new spinprec_config{io::parse_config(json_text)};
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_config_load(const char* path, spinprec_config** out) {
  SPINPREC_REQUIRE(path && out, "spinprec_config_load: null argument");
  return guarded([&] {
    const std::string text = io::read_file(path);
    try {
      *out = new spinprec_config{io::parse_config(text)};
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(path) + ": " + e.what());
    }
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_config_to_json(const spinprec_config* cfg, char** out) {
  SPINPREC_REQUIRE(cfg && out, "spinprec_config_to_json: null argument");
  return guarded([&] {
    *out = duplicate(io::config_json(cfg->spec));
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_config_report(const spinprec_config* cfg, char** out) {
  SPINPREC_REQUIRE(cfg && out, "spinprec_config_report: null argument");
  return guarded([&] {
    *out = duplicate(io::validation_json(cfg->spec));
    return SPINPREC_OK;
  });
}

void spinprec_config_free(spinprec_config* cfg) { delete cfg; }

spinprec_status spinprec_simulate(const spinprec_config* cfg, spinprec_run** out) {
  SPINPREC_REQUIRE(cfg && out, "spinprec_simulate: null argument");
  return guarded([&] {
    *out = new spinprec_run{analysis::simulate(cfg->spec)};
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_run_precession(const spinprec_run* run, spinprec_precession* out) {
  SPINPREC_REQUIRE(run && out, "spinprec_run_precession: null argument");
  const auto& p = run->result.precession;
  if (!p) return set_error(SPINPREC_E_FIT, run->result.extraction_error);
  *out = {p->omega, p->omega_uncertainty, p->signed_omega, p->fit_residual, p->accumulated_phase, p->points};
  return SPINPREC_OK;
}

spinprec_status spinprec_run_stats_get(const spinprec_run* run, spinprec_run_stats* out) {
  SPINPREC_REQUIRE(run && out, "spinprec_run_stats_get: null argument");
  const auto& r = run->result;
  *out = {r.spec.laser.total_cycles,          r.spec.n_max,
          r.stats.max_norm_drift,             r.stats.final_negative_population,
          r.stats.max_edge_population,        r.elapsed_seconds};
  return SPINPREC_OK;
}

size_t spinprec_run_sample_count(const spinprec_run* run) { return run ? run->result.series.size() : 0; }

spinprec_status spinprec_run_sample(const spinprec_run* run, size_t index, spinprec_sample* out) {
  SPINPREC_REQUIRE(run && out, "spinprec_run_sample: null argument");
  SPINPREC_REQUIRE(index < run->result.series.size(), "spinprec_run_sample: index out of range");
  const auto& s = run->result.series[index];
  *out = {s.t, s.sy, s.sz, s.norm, s.neg_energy_pop};
  return SPINPREC_OK;
}

spinprec_status spinprec_run_csv(const spinprec_run* run, char** out) {
  SPINPREC_REQUIRE(run && out, "spinprec_run_csv: null argument");
  return guarded([&] {
    *out = duplicate(io::series_csv(run->result));
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_run_json(const spinprec_run* run, char** out) {
  SPINPREC_REQUIRE(run && out, "spinprec_run_json: null argument");
  return guarded([&] {
    *out = duplicate(io::run_json(run->result));
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_run_write(const spinprec_run* run, const char* csv_path, const char* json_path) {
  SPINPREC_REQUIRE(run, "spinprec_run_write: null run");
  return guarded([&] {
    if (csv_path) io::write_file(csv_path, io::series_csv(run->result));
    if (json_path) io::write_file(json_path, io::run_json(run->result));
    return SPINPREC_OK;
  });
}

void spinprec_run_free(spinprec_run* run) { delete run; }

spinprec_status spinprec_sweep_run(const spinprec_config* cfg, spinprec_axis axis, const double* values,
                                   size_t count, spinprec_sweep** out) {
  SPINPREC_REQUIRE(cfg && out, "spinprec_sweep_run: null argument");
  SPINPREC_REQUIRE(count > 0 && values, "sweep value list is empty");
  SPINPREC_REQUIRE(axis == SPINPREC_AXIS_FIELD || axis == SPINPREC_AXIS_ELLIPTICITY, "unknown sweep axis");
  return guarded([&] {
    const std::span<const double> v(values, count);
    auto* s = new spinprec_sweep{cfg->spec, io::SweepAxis::field, {}};
    try {
      if (axis == SPINPREC_AXIS_FIELD) {
        s->outcome = analysis::field_sweep(cfg->spec, v);
      } else {
        s->axis = io::SweepAxis::ellipticity;
        s->outcome = analysis::ellipticity_sweep(cfg->spec, v);
      }
    } catch (...) {
      delete s;
      throw;
    }
    *out = s;
    return SPINPREC_OK;
  });
}

int spinprec_sweep_complete(const spinprec_sweep* sweep) { return sweep && sweep->outcome.complete() ? 1 : 0; }

size_t spinprec_sweep_point_count(const spinprec_sweep* sweep) { return sweep ? sweep->outcome.points.size() : 0; }

spinprec_status spinprec_sweep_point_get(const spinprec_sweep* sweep, size_t index, spinprec_sweep_point* out) {
  SPINPREC_REQUIRE(sweep && out, "spinprec_sweep_point_get: null argument");
  SPINPREC_REQUIRE(index < sweep->outcome.points.size(), "spinprec_sweep_point_get: index out of range");
  const auto& p = sweep->outcome.points[index];
  const double nan = std::numeric_limits<double>::quiet_NaN();
  spinprec_sweep_point r{p.value, SPINPREC_OK, nan, nan};
  if (p.run && p.run->precession) {
    r.omega = p.run->precession->omega;
    r.fit_residual = p.run->precession->fit_residual;
  } else {
    r.status = p.run ? SPINPREC_E_FIT : SPINPREC_E_SOLVER;
  }
  *out = r;
  return SPINPREC_OK;
}

spinprec_status spinprec_sweep_scaling(const spinprec_sweep* sweep, spinprec_scaling* out) {
  SPINPREC_REQUIRE(sweep && out, "spinprec_sweep_scaling: null argument");
  SPINPREC_REQUIRE(sweep->axis == io::SweepAxis::field, "scaling fit needs a field sweep");
  return guarded([&] {
    const auto f = analysis::scaling_of(sweep->outcome);
    *out = {f.exponent, f.exponent_uncertainty, f.prefactor, f.r_squared};
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_sweep_write(const spinprec_sweep* sweep, const char* csv_path, const char* json_path) {
  SPINPREC_REQUIRE(sweep, "spinprec_sweep_write: null sweep");
  return guarded([&] {
    if (csv_path) io::write_file(csv_path, io::sweep_csv(sweep->spec, sweep->axis, sweep->outcome));
    if (json_path) io::write_file(json_path, io::sweep_json(sweep->spec, sweep->axis, sweep->outcome));
    return SPINPREC_OK;
  });
}

void spinprec_sweep_free(spinprec_sweep* sweep) { delete sweep; }

spinprec_status spinprec_bounds_get(double wavelength_m, double n_cycles, spinprec_bounds* out) {
  SPINPREC_REQUIRE(out, "spinprec_bounds_get: null argument");
  return guarded([&] {
    const auto b = analysis::experimental_bounds(wavelength_m, n_cycles);
    *out = {b.e_min, b.e_max, b.feasible ? 1 : 0, b.intensity_min, b.intensity_max};
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_bounds_json(double wavelength_m, double n_cycles, char** out) {
  SPINPREC_REQUIRE(out, "spinprec_bounds_json: null argument");
  return guarded([&] {
    *out = duplicate(io::bounds_json(wavelength_m, n_cycles));
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_omega_dirac(double wavelength_m, double field_V_per_m, double ellipticity_rad, double* out) {
  SPINPREC_REQUIRE(out, "spinprec_omega_dirac: null argument");
  return guarded([&] {
    *out = analysis::predicted_omega(analysis::Theory::dirac, laser(wavelength_m, field_V_per_m, ellipticity_rad));
    return SPINPREC_OK;
  });
}

spinprec_status spinprec_omega_pauli(double wavelength_m, double field_V_per_m, double ellipticity_rad, double* out) {
  SPINPREC_REQUIRE(out, "spinprec_omega_pauli: null argument");
  return guarded([&] {
    *out = analysis::predicted_omega(analysis::Theory::pauli_nonrel, laser(wavelength_m, field_V_per_m, ellipticity_rad));
    return SPINPREC_OK;
  });
}

}  // extern "C"
