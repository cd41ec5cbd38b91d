#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spinprec/analysis.hpp"
#include "spinprec/error.hpp"

using namespace spinprec;
using namespace spinprec::analysis;

namespace {

LaserConfig laser(double field, double eta = oracle::pi / 2) {
  LaserConfig c;
  c.peak_field = field;
  c.ellipticity = eta;
  return c;
}

// Rotating spin with a periodic micromotion on top of the slow phase.
std::vector<SpinSample> synthetic(double omega, double period, int cycles, int per_cycle, double wobble) {
  std::vector<SpinSample> s;
  for (int i = 0; i <= cycles * per_cycle; ++i) {
    const double t = i * period / per_cycle;
    const double phi = omega * t + wobble * std::sin(2.0 * oracle::pi * t / period);
    s.push_back({t, 0.5 * std::sin(phi), 0.5 * std::cos(phi)});
  }
  return s;
}

FitError::Kind kind_of(auto&& f) {
  try {
    f();
  } catch (const FitError& e) {
    return e.kind();
  }
  FAIL("no FitError thrown");
  return FitError::Kind::bad_input;
}

// Bisection on Omega_D(E) n lambda / c = pi using the oracle formula.
double oracle_e_min(double lambda, double n) {
  double lo = 1e10, hi = 1e18;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    const double phase = oracle::omega_dirac_si(lambda, mid, oracle::pi / 2) * n * lambda / oracle::c_light;
    (phase < oracle::pi ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("phase slope recovers a synthetic frequency") {
    const double period = 2.57e-19, omega = 3.1e16;
    const auto s = synthetic(omega, period, 400, 16, 0.05);
    const auto r = extract_frequency_phase_slope(s, 20 * period, 380 * period, period);
    CHECK(std::abs(r.omega - omega) / omega < 1e-10);
    CHECK(r.signed_omega > 0.0);
    CHECK(r.points == 360);
    CHECK(r.accumulated_phase == doctest::Approx(omega * 359 * period).epsilon(1e-9));
    const auto back = synthetic(-omega, period, 400, 16, 0.0);
    CHECK(extract_frequency_phase_slope(back, 20 * period, 380 * period, period).signed_omega ==
          doctest::Approx(-omega).epsilon(1e-10));
  }

  TEST_CASE("phase slope failure modes") {
    const double period = 1.0;
    const auto flat = synthetic(0.0, period, 100, 16, 0.0);
    CHECK(kind_of([&] { extract_frequency_phase_slope(flat, 10, 90, period); }) ==
          FitError::Kind::insufficient_signal);
    CHECK(kind_of([&] { extract_frequency_phase_slope(flat, 10, 12, period); }) == FitError::Kind::bad_input);
    const auto sparse = synthetic(0.1, period, 100, 4, 0.0);
    CHECK(kind_of([&] { extract_frequency_phase_slope(sparse, 10, 90, period); }) == FitError::Kind::bad_input);
  }

  TEST_CASE("multi-run cosine fit recovers a synthetic frequency") {
    const double omega = 2.3e13, t0 = 4e-14;
    std::vector<TimedValue> runs;
    for (int i = 0; i < 16; ++i) {
      const double T = 1e-13 + i * 2e-14;
      runs.push_back({T, 0.5 * std::cos(omega * (T - t0))});
    }
    const auto r = extract_frequency_multirun(runs);
    CHECK(std::abs(r.omega - omega) / omega < 1e-8);
    CHECK(r.method == Method::multi_run_fit);
    const auto seeded = extract_frequency_multirun(runs, 0.9 * omega);
    CHECK(std::abs(seeded.omega - omega) / omega < 1e-8);

    std::vector<TimedValue> few(runs.begin(), runs.begin() + 11);
    CHECK(kind_of([&] { extract_frequency_multirun(few); }) == FitError::Kind::bad_input);
    std::vector<TimedValue> slow;
    for (int i = 0; i < 12; ++i) slow.push_back({i * 1e-15, 0.5 * std::cos(omega * i * 1e-15)});
    CHECK(kind_of([&] { extract_frequency_multirun(slow, omega); }) == FitError::Kind::insufficient_signal);
  }

  TEST_CASE("closed-form frequencies match the oracle") {
    for (double e : {1.38e14, 2e14, 5.53e14}) {
      const LaserConfig c = laser(e);
      CHECK(omega_dirac_formula(c) == doctest::Approx(oracle::omega_dirac_si(c.wavelength, e, oracle::pi / 2)).epsilon(1e-12));
      CHECK(omega_pauli_formula(c) == doctest::Approx(oracle::omega_pauli_si(c.wavelength, e)).epsilon(1e-12));
    }
    CHECK(omega_dirac_formula(laser(1.38e14)) == doctest::Approx(1.05e13).epsilon(0.01));
    CHECK(omega_pauli_formula(laser(1.38e14)) == doctest::Approx(3.45e14).epsilon(0.01));
    CHECK(omega_dirac_formula(laser(2.76e14)) / omega_dirac_formula(laser(1.38e14)) == doctest::Approx(16.0));
    CHECK(omega_pauli_formula(laser(2.76e14)) / omega_pauli_formula(laser(1.38e14)) == doctest::Approx(4.0));
    CHECK(omega_dirac_formula(laser(0.0)) == 0.0);
    CHECK(predicted_omega(Theory::dirac, laser(2e14, oracle::pi / 6)) ==
          doctest::Approx(0.5 * omega_dirac_formula(laser(2e14))));
  }

  TEST_CASE("perturbative validity and intensity") {
    const ValidityReport v = perturbative_validity(laser(1.38e14));
    const double k = 2 * oracle::pi / 0.992e-10;
    CHECK(v.recoil_ratio == doctest::Approx(oracle::e_charge * 1.38e14 / (k * k * oracle::hbar * oracle::c_light)));
    CHECK(v.recoil_ratio == doctest::Approx(0.174).epsilon(0.01));
    CHECK(v.ok());
    CHECK_FALSE(perturbative_validity(laser(8e14)).recoil_bound);
    CHECK(intensity_w_per_cm2(1.32e14) == doctest::Approx(oracle::eps0 * oracle::c_light * 1.32e14 * 1.32e14 * 1e-4));
  }

  TEST_CASE("experimental bounds") {
    const Bounds b = experimental_bounds(0.992e-10, 5000);
    const double k = 2 * oracle::pi / 0.992e-10;
    CHECK(b.e_max == doctest::Approx(k * k * oracle::hbar * oracle::c_light / oracle::e_charge).epsilon(1e-12));
    CHECK(b.e_max == doctest::Approx(7.9e14).epsilon(0.01));
    CHECK(b.e_min == doctest::Approx(oracle_e_min(0.992e-10, 5000)).epsilon(1e-9));
    CHECK(b.feasible);
    CHECK_FALSE(experimental_bounds(1e-8, 5000).feasible);
    CHECK_THROWS_AS(experimental_bounds(0.0, 5000), ConfigError);
    CHECK_THROWS_AS(experimental_bounds(1e-10, 0.5), ConfigError);

    const CoincidencePoint cp = coincidence_point(5000);
    const Bounds at = experimental_bounds(cp.wavelength, 5000);
    CHECK(at.e_min == doctest::Approx(at.e_max).epsilon(1e-9));
    CHECK(cp.field == doctest::Approx(at.e_max).epsilon(1e-9));
    CHECK(cp.wavelength == doctest::Approx(0.24e-9).epsilon(0.02));
    CHECK(cp.field == doctest::Approx(1.32e14).epsilon(0.02));
    CHECK(cp.intensity == doctest::Approx(4.64e21).epsilon(0.02));
    const Bounds fixed = experimental_bounds(0.24e-9, 5000);
    CHECK(fixed.e_min == doctest::Approx(1.32e14).epsilon(0.03));
    CHECK(fixed.e_max == doctest::Approx(1.32e14).epsilon(0.03));
  }

  TEST_CASE("power-law fit") {
    std::vector<std::pair<double, double>> pts;
    for (double e : log_spaced(2e14, 6e14, 5)) pts.push_back({e, 7e-45 * std::pow(e, 4)});
    const ScalingFit f = fit_power_law(pts);
    CHECK(f.exponent == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(f.prefactor == doctest::Approx(7e-45).epsilon(1e-9));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_power_law(std::span(pts).first(4)), FitError);
    std::vector<std::pair<double, double>> narrow;
    for (double e : log_spaced(2e14, 5e14, 5)) narrow.push_back({e, e * e});
    CHECK_THROWS_AS(fit_power_law(narrow), FitError);
    pts[2].second = -1.0;
    CHECK_THROWS_AS(fit_power_law(pts), FitError);
  }

  TEST_CASE("log-spaced grid") {
    const auto g = log_spaced(1e14, 1e16, 3);
    REQUIRE(g.size() == 3);
    CHECK(g[1] == doctest::Approx(1e15));
    CHECK(g[2] == 1e16);
    CHECK(log_spaced(5.0, 5.0, 1).front() == 5.0);
    CHECK_THROWS_AS(log_spaced(0.0, 1.0, 3), ConfigError);
  }

  TEST_CASE("run planning from a target phase") {
    RunSpec s;
    s.theory = Theory::pauli_nonrel;
    s.laser = laser(5.53e14);
    s.target_phase = 0.5;
    const RunSpec p = plan(s);
    const double plateau = 0.5 / (oracle::omega_pauli_si(s.laser.wavelength, 5.53e14) * s.laser.period());
    CHECK(p.laser.total_cycles == std::clamp(std::ceil(40.0 + plateau), 200.0, 2e5));
    s.max_cycles = 250;
    CHECK(plan(s).laser.total_cycles == 250);
    s.target_phase = 0.0;
    CHECK(plan(s).laser.total_cycles == s.laser.total_cycles);
  }

  TEST_CASE("sweep argument checks") {
    RunSpec s;
    s.theory = Theory::pauli_nonrel;
    const std::vector<double> etas{0.3, 1.0};
    CHECK_THROWS_AS(ellipticity_sweep(s, etas), ConfigError);
    const std::vector<double> wide{0.3, 2.0};
    CHECK_THROWS_AS(ellipticity_sweep(s, wide), ConfigError);
    const std::vector<double> fields{1e14, 9e14};
    CHECK_THROWS_AS(field_sweep(s, fields), ConfigError);
    CHECK_THROWS_AS(field_sweep(s, std::span<const double>{}), ConfigError);
    CHECK(parse_theory("pauli-rel") == Theory::pauli_rel);
    CHECK_THROWS_AS(parse_theory("schrodinger"), ConfigError);
    CHECK(to_string(Theory::classical_full) == "classical-full");
  }

  TEST_CASE("worker count comes from the environment") {
    setenv("SPINPREC_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    setenv("SPINPREC_WORKERS", "zero", 1);
    CHECK_THROWS_AS(worker_count(), ConfigError);
    unsetenv("SPINPREC_WORKERS");
    CHECK(worker_count() >= 1);
  }

  TEST_CASE("phase slope and multi-run fit agree on a Pauli run") {
    RunSpec s;
    s.theory = Theory::pauli_nonrel;
    pauli::Toggles t;
    t.include_A_squared = false;
    s.pauli_terms = t;
    s.laser = laser(5.53e14);
    s.laser.ramp_cycles = 10;
    s.laser.total_cycles = 300;
    s.n_max = 4;
    const RunResult one = simulate(s);
    REQUIRE(one.precession.has_value());

    std::vector<TimedValue> runs;
    for (int i = 0; i < 12; ++i) {
      s.laser.total_cycles = 100 + 180 * i;
      const RunResult r = simulate(s);
      runs.push_back({s.laser.total_cycles * s.laser.period(), r.series.back().sz});
    }
    const auto multi = extract_frequency_multirun(runs, one.precession->omega);
    CHECK(multi.omega == doctest::Approx(one.precession->omega).epsilon(0.01));
  }
}
