#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "spinprec/error.hpp"
#include "spinprec/io.hpp"

using namespace spinprec;
using nlohmann::json;

namespace {

const char* base_config = R"({
  "wavelength_m": 0.992e-10,
  "peak_field_V_per_m": 5.53e14,
  "ellipticity_rad": 1.5707963267948966,
  "ramp_cycles": 10,
  "total_cycles": 60,
  "theory": "pauli-nonrel",
  "n_max": 4
})";

std::string config_error(const std::string& text) {
  try {
    io::parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string with(const std::string& key_line) {
  std::string s = base_config;
  s.insert(s.find("\"n_max\""), key_line + ",\n  ");
  return s;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("configuration round trip") {
    const auto spec = io::parse_config(with(R"("pauli_terms": {"A_squared": false}, "steps_per_cycle": 256)"));
    CHECK(spec.theory == analysis::Theory::pauli_nonrel);
    CHECK(spec.n_max == 4);
    CHECK(spec.propagation.steps_per_cycle == 256);
    REQUIRE(spec.pauli_terms.has_value());
    CHECK_FALSE(spec.pauli_terms->include_A_squared);
    CHECK(spec.pauli_terms->include_sigma_dot_B);

    const std::string canon = io::config_json(spec);
    const auto again = io::parse_config(canon);
    CHECK(io::config_json(again) == canon);
    CHECK(again.laser.peak_field == spec.laser.peak_field);
    CHECK(again.laser.ellipticity == spec.laser.ellipticity);
    CHECK(again.propagation.rel_tol == spec.propagation.rel_tol);

    // The manifest embeds the same configuration object.
    const json manifest = json::parse(io::manifest_json(spec));
    CHECK(manifest["config"] == json::parse(canon));
    CHECK(manifest["tool"] == "spinprec");
    CHECK(manifest["solver"]["theory"] == "pauli-nonrel");
  }

  TEST_CASE("configuration errors name the offending line") {
    std::string msg = config_error(R"({"wavelength_m": 1e-10})");
    CHECK(msg.find("peak_field_V_per_m") != std::string::npos);

    std::string bad = base_config;
    bad.replace(bad.find("1.5707963267948966"), 18, "2.5");
    msg = config_error(bad);
    CHECK(msg.rfind("line 4: ellipticity_rad", 0) == 0);

    msg = config_error(with(R"("colour": "blue")"));
    CHECK(msg.rfind("line 8:", 0) == 0);
    CHECK(msg.find("unknown key") != std::string::npos);

    std::string typed = base_config;
    typed.replace(typed.find("\"n_max\": 4"), 10, "\"n_max\": \"eight\"");
    msg = config_error(typed);
    CHECK(msg.rfind("line 8:", 0) == 0);

    std::string broken = base_config;
    broken.erase(broken.find(",\n  \"theory\""), 1);
    msg = config_error(broken);
    CHECK(msg.find("malformed JSON") != std::string::npos);
    CHECK(msg.rfind("line ", 0) == 0);

    std::string ramp = base_config;
    ramp.replace(ramp.find("\"total_cycles\": 60"), 18, "\"total_cycles\": 15");
    CHECK(config_error(ramp).rfind("line 5: ", 0) == 0);  // 2 * ramp_cycles exceeds total_cycles

    std::string theory = base_config;
    theory.replace(theory.find("pauli-nonrel"), 12, "schrodinger");
    CHECK(config_error(theory).rfind("line 7: theory", 0) == 0);
    std::string classical = base_config;
    classical.replace(classical.find("pauli-nonrel"), 12, "classical-full");
    CHECK(config_error(classical.insert(classical.find("\"n_max\""), "\"integrator\": \"magnus\",\n  ")) != "");
    CHECK(config_error(with(R"("integrator": "dop853")")) != "");
  }

  TEST_CASE("series CSV format and determinism") {
    const auto spec = io::parse_config(base_config);
    const auto a = analysis::simulate(spec);
    const auto b = analysis::simulate(spec);
    const std::string csv = io::series_csv(a);
    CHECK(csv == io::series_csv(b));
    const auto rows = lines(csv);
    REQUIRE(rows.size() == a.series.size() + 2);
    CHECK(rows[0].rfind("# manifest: {", 0) == 0);
    CHECK(json::parse(rows[0].substr(12))["config"]["theory"] == "pauli-nonrel");
    CHECK(rows[1] == "t_s,sy_over_hbar,sz_over_hbar,norm");
    // 17 significant digits round-trip the doubles exactly.
    std::stringstream row(rows.back());
    std::string cell;
    std::getline(row, cell, ',');
    CHECK(std::stod(cell) == a.series.back().t);
    std::getline(row, cell, ',');
    CHECK(std::stod(cell) == a.series.back().sy);

    const json r = json::parse(io::run_json(a));
    CHECK(r.contains("manifest"));
    CHECK(r.contains("timing"));
    CHECK(r["stats"]["max_norm_drift"].get<double>() < 1e-9);
  }

  TEST_CASE("Dirac series carries the negative-energy column") {
    auto spec = io::parse_config(base_config);
    spec.theory = analysis::Theory::dirac;
    spec.laser.peak_field = 0.0;
    spec.n_max = 2;
    const auto run = analysis::simulate(spec);
    const auto rows = lines(io::series_csv(run));
    CHECK(rows[1] == "t_s,sy_over_hbar,sz_over_hbar,norm,neg_energy_pop");
    const json r = json::parse(io::run_json(run));
    CHECK(r["precession"].is_null());
    CHECK(r["extraction_error"].get<std::string>().find("insufficient") != std::string::npos);
  }

  TEST_CASE("sweep tables and reports") {
    const auto spec = io::parse_config(base_config);
    analysis::SweepOutcome outcome;
    analysis::SweepPoint failed{3e14, std::nullopt, "solver exploded"};
    outcome.points.push_back(failed);
    const auto rows = lines(io::sweep_csv(spec, io::SweepAxis::field, outcome));
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].rfind("peak_field_V_per_m,omega_rad_per_s,", 0) == 0);
    CHECK(rows[2].find("failed") != std::string::npos);
    const json sj = json::parse(io::sweep_json(spec, io::SweepAxis::field, outcome));
    CHECK(sj["complete"] == false);
    CHECK(io::parse_axis("ellipticity") == io::SweepAxis::ellipticity);
    CHECK_THROWS_AS(io::parse_axis("frequency"), ConfigError);

    const json b = json::parse(io::bounds_json(0.24e-9, 5000));
    CHECK(b["feasible"].is_boolean());
    const json v = json::parse(io::validation_json(spec));
    CHECK(v["valid"] == true);
  }

  TEST_CASE("file helpers report IO errors") {
    const auto dir = std::filesystem::temp_directory_path() / "spinprec_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "x.txt").string();
    io::write_file(path, "hello\n");
    CHECK(io::read_file(path) == "hello\n");
    CHECK_THROWS_AS(io::read_file((dir / "missing.json").string()), IoError);
    CHECK_THROWS_AS(io::write_file((dir / "no" / "such" / "dir.txt").string(), "x"), IoError);
    std::filesystem::remove_all(dir);
  }
}
