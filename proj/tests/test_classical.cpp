#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spinprec/classical.hpp"
#include "spinprec/error.hpp"

using namespace spinprec;
using namespace spinprec::classical;

namespace {

LaserConfig pulse(double field, double eta, double ramp = 20, double total = 100) {
  LaserConfig c;
  c.peak_field = field;
  c.ellipticity = eta;
  c.ramp_cycles = ramp;
  c.total_cycles = total;
  return c;
}

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> g;
  const Vec3 v{g(rng), g(rng), g(rng)};
  return (1.0 / norm(v)) * v;
}

// Closed-form rotation angles typed from the formulas: Omega_P = E0^2 / k.
double angle_B(const oracle::Pulse& p, double t, double x) {
  return 2.0 * p.amp * p.amp / p.k * t * std::pow(std::sin(p.k * x), 2);
}
double angle_ExA(const oracle::Pulse& p, double t, double x) {
  return -2.0 * p.amp * p.amp / p.k * t * std::pow(std::cos(p.k * x), 2);
}

double angle_of(const Vec3& s) { return std::atan2(s.y, s.z); }

}  // namespace

TEST_SUITE("classical-solver") {
  TEST_CASE("torques are perpendicular to the spin") {
    std::mt19937 rng(3);
    for (int i = 0; i < 100; ++i) {
      const Vec3 s = 0.5 * random_unit(rng), B = random_unit(rng), E = random_unit(rng), A = random_unit(rng);
      CHECK(std::abs(dot(spin_torque_B(s, B), s)) < 1e-15);
      CHECK(std::abs(dot(spin_torque_ExA(s, E, A), s)) < 1e-15);
    }
    const Vec3 b{0.1, -0.3, 0.2};
    const Vec3 t = spin_torque_B(2.5 * b, b);
    CHECK(norm(t) < 1e-16);
  }

  TEST_CASE("E x A torque vanishes for linear polarization") {
    const FieldParams p = internal_params(pulse(1.38e14, 0.0));
    for (double t : {0.1, 3.0, 77.0, 1234.5}) {
      const StandingWave sw = amplitudes(t, p, Envelope::continuous);
      CHECK(norm(spin_torque_ExA({0, 0, 0.5}, sw.e, sw.a)) < 1e-20);
    }
  }

  TEST_CASE("closed-form solutions at representative points") {
    const LaserConfig c = pulse(1.38e14, oracle::pi / 2);
    const FieldParams p = internal_params(c);
    const oracle::Pulse op = oracle::make_pulse(c.wavelength, c.peak_field, c.ellipticity, 20, 100);
    CHECK(omega_pauli_internal(p) == doctest::Approx(op.amp * op.amp / op.k).epsilon(1e-12));
    const double wp = omega_pauli_internal(p);

    // At a node of B the spin does not move.
    const Vec3 s0 = analytic_spin_B(1e6, 0.0, p);
    CHECK(s0.z == doctest::Approx(0.5));
    CHECK(std::abs(s0.y) < 1e-15);
    // An antinode of B flips the spin after Omega_P t = pi / 2.
    const double quarter = oracle::pi / (2.0 * p.k);
    const Vec3 flipped = analytic_spin_B(oracle::pi / (2.0 * wp), quarter, p);
    CHECK(flipped.z == doctest::Approx(-0.5));
    // E x A under circular light runs the other way with cos^2 kx.
    const double x = 0.3 * two_pi / p.k, t = 0.7 / wp;
    CHECK(angle_of(analytic_spin_B(t, x, p)) == doctest::Approx(angle_B(op, t, x)).epsilon(1e-12));
    CHECK(angle_of(analytic_spin_ExA(t, x, p)) == doctest::Approx(angle_ExA(op, t, x)).epsilon(1e-12));
    // lambda / 8: both angles cancel.
    const double eighth = oracle::pi / (4.0 * p.k);
    CHECK(std::abs(analytic_angle(EnsembleMode::both_analytic, t, eighth, p)) < 1e-14);
    CHECK(analytic_angle(EnsembleMode::both_analytic, t, x, p) ==
          doctest::Approx(angle_B(op, t, x) + angle_ExA(op, t, x)).epsilon(1e-12));
  }

  TEST_CASE("SI overloads return spin in J s") {
    const LaserConfig c = pulse(1.38e14, oracle::pi / 2);
    const Vec3 s = analytic_spin_B(0.0, 0.0, c);
    CHECK(s.z == doctest::Approx(0.5 * oracle::hbar).epsilon(1e-9));
    const double wp_si = oracle::omega_pauli_si(c.wavelength, c.peak_field);
    const Vec3 half = analytic_spin_B(oracle::pi / (4.0 * wp_si), c.wavelength / 4.0, c);
    CHECK(half.z == doctest::Approx(0.0).epsilon(1e-6 * oracle::hbar));
    CHECK(half.y == doctest::Approx(0.5 * oracle::hbar).epsilon(1e-9));
  }

  TEST_CASE("closed forms refuse non-circular light") {
    const FieldParams p = internal_params(pulse(1.38e14, 1.0));
    CHECK_THROWS_AS(analytic_spin_B(1.0, 0.0, p), UnsupportedConfiguration);
    CHECK_THROWS_AS(analytic_spin_ExA(1.0, 0.0, p), UnsupportedConfiguration);
    CHECK_THROWS_AS(analytic_angle(EnsembleMode::B_only, 1.0, 0.0, p), UnsupportedConfiguration);
  }

  TEST_CASE("fixed-position integration follows the closed forms") {
    const LaserConfig c = pulse(1.38e14, oracle::pi / 2);
    const FieldParams p = internal_params(c);
    const oracle::Pulse op = oracle::make_pulse(c.wavelength, c.peak_field, c.ellipticity, 20, 100);
    const double t_end = 1000.0 * p.period();
    IntegrationOptions o;
    o.samples_per_cycle = 1;
    double worst = 0.0;
    for (int j = 0; j < 8; ++j) {
      const double x = (j + 0.5) / 8.0 * two_pi / p.k;
      for (Torque torque : {Torque::B_only, Torque::ExA_only}) {
        Vec3 last{};
        propagate_fixed_position(x, {0, 0, 0.5}, t_end, p, Envelope::continuous, torque, o,
                                 [&](double, const Vec3& s) { last = s; });
        const double ref = torque == Torque::B_only ? angle_B(op, t_end, x) : angle_ExA(op, t_end, x);
        const double d = std::remainder(angle_of(last) - ref, two_pi);
        worst = std::max(worst, std::abs(d));
      }
    }
    INFO("largest angle error " << worst);
    CHECK(worst < 1e-2);
  }

  TEST_CASE("full classical equations are Hamilton's equations of the stated Hamiltonian") {
    const FieldParams p = internal_params(pulse(4e14, 0.9, 3, 10));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      std::array<double, 9> y{};
      for (int j = 0; j < 6; ++j) y[j] = u(rng) * (j < 3 ? 30.0 : 0.05);
      const Vec3 s = 0.5 * random_unit(rng);
      y[6] = s.x, y[7] = s.y, y[8] = s.z;
      const double t = (0.1 + 0.8 * (u(rng) + 1.0) / 2.0) * p.total_time;
      std::array<double, 9> dy{};
      full_rhs(t, y.data(), dy.data(), p, Envelope::windowed);
      std::array<double, 9> grad{};
      for (int j = 0; j < 9; ++j) {
        const double h = j < 3 ? 1e-4 : 1e-6;
        auto yp = y, ym = y;
        yp[j] += h;
        ym[j] -= h;
        grad[j] = (hamiltonian(t, yp.data(), p, Envelope::windowed) - hamiltonian(t, ym.data(), p, Envelope::windowed)) /
                  (2 * h);
      }
      for (int j = 0; j < 3; ++j) {
        CHECK(dy[j] == doctest::Approx(grad[j + 3]).epsilon(1e-6));        // dr/dt = dH/dp
        CHECK(dy[j + 3] == doctest::Approx(-grad[j]).epsilon(1e-5).scale(1e-8));  // dp/dt = -dH/dr
      }
      // Spin: ds/dt = (dH/ds) x s.
      const Vec3 hs{grad[6], grad[7], grad[8]};
      const Vec3 expect = cross(hs, s);
      CHECK(norm(Vec3{dy[6], dy[7], dy[8]} - expect) < 1e-6 * (norm(expect) + 1e-12));
    }
  }

  TEST_CASE("full classical run: zero field and spin length") {
    IntegrationOptions o;
    {
      double worst = 0.0;
      propagate_full_classical(rest_initial_state(), pulse(0.0, oracle::pi / 2, 5, 40), o,
                               [&](const ClassicalState& st) {
                                 worst = std::max(worst, norm(st.spin - Vec3{0, 0, 0.5}) + norm(st.position));
                               });
      CHECK(worst < 1e-14);
    }
    const auto stats = propagate_full_classical(rest_initial_state(), pulse(5.53e14, oracle::pi / 2, 20, 1000), o,
                                                nullptr);
    CHECK(stats.max_spin_drift < 1e-9);
    ClassicalState bad = rest_initial_state();
    bad.spin = {0, 0, 1};
    CHECK_THROWS_AS(propagate_full_classical(bad, pulse(1e14, 1.0), o, nullptr), SolverError);
  }

  TEST_CASE("ensemble averages") {
    const LaserConfig c = pulse(1.38e14, oracle::pi / 2);
    const FieldParams p = internal_params(c);
    const double wp = omega_pauli_internal(p);
    const double lambda = two_pi / p.k;
    const auto big = EnsembleSpec::uniform(10000, lambda);
    CHECK(std::abs(ensemble_average_angle(big, EnsembleMode::both_analytic, 1.0 / wp, p)) < 1e-6);
    const Vec3 start = ensemble_average_spin(big, EnsembleMode::B_only, 0.0, p);
    CHECK(start.z == doctest::Approx(0.5));
    CHECK(ensemble_average_angle(EnsembleSpec::uniform(64, lambda), EnsembleMode::B_only, 1.0 / wp, p) ==
          doctest::Approx(1.0));  // <2 sin^2 kx> = 1

    EnsembleSpec single;
    single.count = 1;
    single.positions = {0.0};
    const Vec3 one = ensemble_average_spin(single, EnsembleMode::ExA_only, 0.3 / wp, p);
    CHECK(angle_of(one) == doctest::Approx(-0.6));
    EnsembleSpec broken = big;
    broken.positions[3] += 0.01 * lambda;
    CHECK_THROWS_AS(broken.validate(lambda), ConfigError);
    CHECK_THROWS_AS(EnsembleSpec::uniform(0, lambda), ConfigError);
  }
}
