// Command-line front end; talks to the library only through the C interface.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spinprec/spinprec.h"

namespace {

struct ConfigDeleter {
  void operator()(spinprec_config* c) const { spinprec_config_free(c); }
};
struct RunDeleter {
  void operator()(spinprec_run* r) const { spinprec_run_free(r); }
};
struct SweepDeleter {
  void operator()(spinprec_sweep* s) const { spinprec_sweep_free(s); }
};
struct StringDeleter {
  void operator()(char* s) const { spinprec_string_free(s); }
};
using ConfigPtr = std::unique_ptr<spinprec_config, ConfigDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

int report(spinprec_status s, const char* context) {
  std::fprintf(stderr, "spinprec %s: %s\n", context, spinprec_last_error());
  return static_cast<int>(s);
}

std::string default_output(const std::string& config, const std::string& suffix) {
  return std::filesystem::path(config).stem().string() + suffix;
}

// Refuses to overwrite the configuration with an output file.
bool clobbers(const std::string& config, const std::string& output) {
  std::error_code ec;
  return std::filesystem::equivalent(config, output, ec);
}

double parse_number(const std::string& text, const char* option) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw CLI::ValidationError(option, "not a number: \"" + text + "\"");
  return v;
}

// "lo:hi:count"; log spacing for field sweeps, linear for ellipticity.
std::vector<double> expand_range(const std::string& text, bool logarithmic) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(parse_number(item, "--range"));
  if (parts.size() != 3 || parts[2] < 1 || parts[2] != static_cast<int>(parts[2]))
    throw CLI::ValidationError("--range", "expected lo:hi:count");
  const double lo = parts[0], hi = parts[1];
  const int n = static_cast<int>(parts[2]);
  if (logarithmic && !(lo > 0.0 && hi > 0.0)) throw CLI::ValidationError("--range", "field range must be positive");
  std::vector<double> v;
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    v.push_back(logarithmic ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
  }
  return v;
}

int cmd_simulate(const std::string& config, std::string csv, std::string json) {
  spinprec_config* raw = nullptr;
  if (auto s = spinprec_config_load(config.c_str(), &raw); s != SPINPREC_OK) return report(s, "config");
  ConfigPtr cfg(raw);
  spinprec_run* run_raw = nullptr;
  if (auto s = spinprec_simulate(cfg.get(), &run_raw); s != SPINPREC_OK) return report(s, "simulate");
  std::unique_ptr<spinprec_run, RunDeleter> run(run_raw);
  if (csv.empty()) csv = default_output(config, "_series.csv");
  if (json.empty()) json = default_output(config, "_result.json");
  if (clobbers(config, csv) || clobbers(config, json)) {
    std::fprintf(stderr, "spinprec simulate: output path would overwrite %s\n", config.c_str());
    return SPINPREC_E_USAGE;
  }
  if (auto s = spinprec_run_write(run.get(), csv.c_str(), json.c_str()); s != SPINPREC_OK) return report(s, "write");

  spinprec_precession p{};
  if (spinprec_run_precession(run.get(), &p) == SPINPREC_OK) {
    std::printf("omega = %.10g rad/s (+- %.3g), accumulated phase %.4g rad\n", p.omega, p.omega_uncertainty,
                p.accumulated_phase);
  } else {
    std::fprintf(stderr, "spinprec simulate: no precession extracted: %s\n", spinprec_last_error());
  }
  std::printf("wrote %s and %s\n", csv.c_str(), json.c_str());
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& axis_name, const std::vector<std::string>& listed,
              const std::string& range, std::string csv, std::string json) {
  const bool field = axis_name == "field";
  std::vector<double> values;
  for (const auto& v : listed)
    if (!v.empty()) values.push_back(parse_number(v, "--values"));
  if (!range.empty()) {
    const auto extra = expand_range(range, field);
    values.insert(values.end(), extra.begin(), extra.end());
  }
  if (values.empty()) {
    std::fprintf(stderr, "spinprec sweep: empty value list (use --values or --range)\n");
    return SPINPREC_E_USAGE;
  }
  spinprec_config* raw = nullptr;
  if (auto s = spinprec_config_load(config.c_str(), &raw); s != SPINPREC_OK) return report(s, "config");
  ConfigPtr cfg(raw);
  spinprec_sweep* sw_raw = nullptr;
  const spinprec_axis axis = field ? SPINPREC_AXIS_FIELD : SPINPREC_AXIS_ELLIPTICITY;
  if (auto s = spinprec_sweep_run(cfg.get(), axis, values.data(), values.size(), &sw_raw); s != SPINPREC_OK)
    return report(s, "sweep");
  std::unique_ptr<spinprec_sweep, SweepDeleter> sweep(sw_raw);
  if (csv.empty()) csv = default_output(config, "_sweep.csv");
  if (json.empty()) json = default_output(config, "_sweep.json");
  if (clobbers(config, csv) || clobbers(config, json)) {
    std::fprintf(stderr, "spinprec sweep: output path would overwrite %s\n", config.c_str());
    return SPINPREC_E_USAGE;
  }
  if (auto s = spinprec_sweep_write(sweep.get(), csv.c_str(), json.c_str()); s != SPINPREC_OK)
    return report(s, "write");

  int exit_code = 0;
  for (size_t i = 0; i < spinprec_sweep_point_count(sweep.get()); ++i) {
    spinprec_sweep_point p{};
    spinprec_sweep_point_get(sweep.get(), i, &p);
    if (p.status == SPINPREC_OK) {
      std::printf("%-14.6g omega = %.10g rad/s\n", p.value, p.omega);
    } else {
      std::printf("%-14.6g failed (see %s)\n", p.value, json.c_str());
      // A solver failure outranks a fit failure.
      if (exit_code != SPINPREC_E_SOLVER) exit_code = p.status;
    }
  }
  if (field && exit_code == 0) {
    spinprec_scaling f{};
    if (auto s = spinprec_sweep_scaling(sweep.get(), &f); s == SPINPREC_OK)
      std::printf("exponent = %.6f +- %.2g (R^2 = %.8f)\n", f.exponent, f.exponent_uncertainty, f.r_squared);
    else
      exit_code = report(s, "fit");
  }
  std::printf("wrote %s and %s\n", csv.c_str(), json.c_str());
  return exit_code;
}

int cmd_bounds(double wavelength, double cycles, const std::string& out) {
  char* raw = nullptr;
  if (auto s = spinprec_bounds_json(wavelength, cycles, &raw); s != SPINPREC_OK) return report(s, "bounds");
  StringPtr text(raw);
  if (out.empty()) {
    std::fputs(text.get(), stdout);
  } else if (FILE* f = std::fopen(out.c_str(), "wb")) {
    std::fputs(text.get(), f);
    std::fclose(f);
  } else {
    std::fprintf(stderr, "spinprec bounds: cannot write %s\n", out.c_str());
    return SPINPREC_E_IO;
  }
  return 0;
}

int cmd_validate(const std::string& config) {
  spinprec_config* raw = nullptr;
  if (auto s = spinprec_config_load(config.c_str(), &raw); s != SPINPREC_OK) return report(s, "config");
  ConfigPtr cfg(raw);
  char* text = nullptr;
  if (auto s = spinprec_config_report(cfg.get(), &text); s != SPINPREC_OK) return report(s, "validate");
  StringPtr owned(text);
  std::fputs(owned.get(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electron spin precession in counterpropagating elliptically polarized laser beams"};
  app.set_version_flag("--version", std::string(spinprec_version()));
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("--workers", workers, "Cap on parallel sweep workers (overrides SPINPREC_WORKERS)")
      ->check(CLI::PositiveNumber);

  std::string config, csv, json, axis = "field", range, out;
  std::vector<std::string> values;
  double wavelength = 0.0, cycles = 0.0;

  auto* sim = app.add_subcommand("simulate", "Run one simulation and extract the precession frequency");
  sim->add_option("config", config, "JSON run configuration")->required();
  sim->add_option("--csv", csv, "Time-series output (default: <config stem>_series.csv)");
  sim->add_option("--json", json, "Sidecar output (default: <config stem>_result.json)");

  auto* sweep = app.add_subcommand("sweep", "Sweep the field strength or the ellipticity");
  sweep->add_option("config", config, "JSON run configuration used as the template")->required();
  sweep->add_option("--axis", axis, "field or ellipticity")->check(CLI::IsMember({"field", "ellipticity"}));
  sweep->add_option("--values", values, "Comma-separated axis values")->delimiter(',');
  sweep->add_option("--range", range, "lo:hi:count (log-spaced for field, linear for ellipticity)");
  sweep->add_option("--csv", csv, "Sweep table (default: <config stem>_sweep.csv)");
  sweep->add_option("--json", json, "Sweep sidecar with the fit (default: <config stem>_sweep.json)");

  auto* bounds = app.add_subcommand("bounds", "Field window for an observable precession");
  bounds->add_option("--wavelength", wavelength, "Wavelength in m")->required();
  bounds->add_option("--cycles", cycles, "Number of laser cycles")->required();
  bounds->add_option("--out", out, "Write the JSON report here instead of stdout");

  auto* validate = app.add_subcommand("validate", "Check a configuration and print derived quantities");
  validate->add_option("config", config, "JSON run configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : SPINPREC_E_USAGE;
  }
  if (workers > 0) setenv("SPINPREC_WORKERS", std::to_string(workers).c_str(), 1);

  try {
    if (*sim) return cmd_simulate(config, csv, json);
    if (*sweep) return cmd_sweep(config, axis, values, range, csv, json);
    if (*bounds) return cmd_bounds(wavelength, cycles, out);
    if (*validate) return cmd_validate(config);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "spinprec: %s\n", e.what());
    return SPINPREC_E_USAGE;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "spinprec: %s\n", e.what());
    return SPINPREC_E_USAGE;
  }
  return SPINPREC_E_USAGE;
}
