#include "spinprec/classical.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "spinprec/error.hpp"
#include "spinprec/ode.hpp"

namespace spinprec::classical {

namespace {

constexpr double q = electron_charge;

void require_circular(const FieldParams& p, const char* what) {
  if (std::abs(p.ellipticity - pi / 2.0) > 1e-12) {
    std::ostringstream os;
    os << what << ": closed form holds for circular polarization only (ellipticity " << p.ellipticity << ")";
    throw UnsupportedConfiguration(os.str());
  }
}

Vec3 spin_from_angle(double theta) { return {0.0, 0.5 * std::sin(theta), 0.5 * std::cos(theta)}; }

Vec3 load(const double* y) { return {y[0], y[1], y[2]}; }

void store(const Vec3& v, double* y) {
  y[0] = v.x;
  y[1] = v.y;
  y[2] = v.z;
}

double spin_drift(const Vec3& s) { return std::abs(norm(s) - 0.5) / 0.5; }

}  // namespace

StandingWave amplitudes(double t, const FieldParams& p, Envelope env) {
  return env == Envelope::continuous ? standing_wave_cw(t, p) : standing_wave(t, p, true);
}

Vec3 spin_torque_B(const Vec3& s, const Vec3& B) { return q * cross(s, B); }

Vec3 spin_torque_ExA(const Vec3& s, const Vec3& E, const Vec3& A) { return -0.5 * q * q * cross(s, cross(E, A)); }

double omega_pauli_internal(const FieldParams& p) { return q * q * p.amplitude * p.amplitude / p.k; }

Vec3 analytic_spin_B(double t, double x, const FieldParams& p) {
  require_circular(p, "analytic_spin_B");
  const double s = std::sin(p.k * x);
  return spin_from_angle(2.0 * omega_pauli_internal(p) * t * s * s);
}

Vec3 analytic_spin_ExA(double t, double x, const FieldParams& p) {
  require_circular(p, "analytic_spin_ExA");
  const double c = std::cos(p.k * x);
  return spin_from_angle(-2.0 * omega_pauli_internal(p) * t * c * c);
}

Vec3 analytic_spin_B(double t_seconds, double x_meters, const LaserConfig& cfg) {
  const UnitScale& u = natural_units;
  return u.action * analytic_spin_B(u.time_to_internal(t_seconds), u.length_to_internal(x_meters), internal_params(cfg));
}

Vec3 analytic_spin_ExA(double t_seconds, double x_meters, const LaserConfig& cfg) {
  const UnitScale& u = natural_units;
  return u.action *
         analytic_spin_ExA(u.time_to_internal(t_seconds), u.length_to_internal(x_meters), internal_params(cfg));
}

IntegrationStats propagate_fixed_position(double x, const Vec3& s0, double t_end, const FieldParams& p, Envelope env,
                                          Torque torque, const IntegrationOptions& opts, const SpinObserver& observer) {
  const double ck = std::cos(p.k * x), sk = std::sin(p.k * x);
  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    const StandingWave sw = amplitudes(t, p, env);
    const Vec3 s = load(y.data());
    Vec3 ds{};
    if (torque != Torque::ExA_only) ds += spin_torque_B(s, {0.0, p.k * sk * sw.a.z, -p.k * sk * sw.a.y});
    if (torque != Torque::B_only) ds += spin_torque_ExA(s, ck * sw.e, ck * sw.a);
    store(ds, dy.data());
  };
  ode::Options o;
  o.rel_tol = opts.rel_tol;
  o.abs_tol = opts.rel_tol;
  o.max_step = opts.max_step_cycles * p.period();
  ode::Dop853 stepper(3, o);
  std::array<double, 3> y{s0.x, s0.y, s0.z};
  IntegrationStats stats;
  double t = 0.0;
  const double stride = p.period() / opts.samples_per_cycle;
  if (observer) observer(t, s0);
  for (long long i = 1; t < t_end; ++i) {
    double target = std::min(t_end, static_cast<double>(i) * stride);
    if (t_end - target < 1e-9 * stride) target = t_end;
    stepper.advance(rhs, t, y, target);
    const Vec3 s = load(y.data());
    stats.max_spin_drift = std::max(stats.max_spin_drift, spin_drift(s));
    if (observer) observer(t, s);
  }
  stats.steps = stepper.stats().accepted;
  stats.rejected = stepper.stats().rejected;
  return stats;
}

// H = (p - qA)^2 / 2 - q s.B + (q^2/2) s.(E x A) with
//   A = a cos kx, B = k sin kx (0, a_z, -a_y), E x A = (e x a) cos^2 kx.
// Only x enters the fields, so p_y and p_z are conserved.
void full_rhs(double t, const double* y, double* dy, const FieldParams& p, Envelope env) {
  const StandingWave sw = amplitudes(t, p, env);
  const Vec3 mom{y[3], y[4], y[5]};
  const Vec3 s{y[6], y[7], y[8]};
  const double kx = p.k * y[0];
  const double ck = std::cos(kx), sk = std::sin(kx);
  const Vec3 A = ck * sw.a;
  const Vec3 dA = -p.k * sk * sw.a;
  const Vec3 b_shape{0.0, sw.a.z, -sw.a.y};
  const Vec3 B = p.k * sk * b_shape;
  const Vec3 dB = p.k * p.k * ck * b_shape;
  const Vec3 ea = cross(sw.e, sw.a);
  const Vec3 ExA = ck * ck * ea;
  const Vec3 dExA = -2.0 * p.k * ck * sk * ea;

  const Vec3 v = mom - q * A;
  store(v, dy);
  dy[3] = q * dot(v, dA) + q * dot(s, dB) - 0.5 * q * q * dot(s, dExA);
  dy[4] = 0.0;
  dy[5] = 0.0;
  store(spin_torque_B(s, B) - 0.5 * q * q * cross(s, ExA), dy + 6);
}

double hamiltonian(double t, const double* y, const FieldParams& p, Envelope env) {
  const StandingWave sw = amplitudes(t, p, env);
  const double kx = p.k * y[0];
  const double ck = std::cos(kx), sk = std::sin(kx);
  const Vec3 v = Vec3{y[3], y[4], y[5]} - q * (ck * sw.a);
  const Vec3 s{y[6], y[7], y[8]};
  const Vec3 B = p.k * sk * Vec3{0.0, sw.a.z, -sw.a.y};
  return 0.5 * dot(v, v) - q * dot(s, B) + 0.5 * q * q * ck * ck * dot(s, cross(sw.e, sw.a));
}

ClassicalState rest_initial_state() {
  ClassicalState st;
  st.spin = {0.0, 0.0, 0.5};
  return st;
}

IntegrationStats propagate_full_classical(const ClassicalState& initial, const LaserConfig& cfg,
                                          const IntegrationOptions& opts, const Observer& observer) {
  cfg.validate();
  if (!(opts.rel_tol >= 1e-13 && opts.rel_tol <= 1e-6)) throw ConfigError("rel_tolerance must lie in [1e-13, 1e-6]");
  if (opts.samples_per_cycle < 1) throw ConfigError("samples_per_cycle must be positive");
  const FieldParams p = internal_params(cfg);
  if (std::abs(norm(initial.spin) - 0.5) > 1e-12) throw SolverError("initial spin must have magnitude 1/2");

  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    full_rhs(t, y.data(), dy.data(), p, Envelope::windowed);
  };
  ode::Options o;
  o.rel_tol = opts.rel_tol;
  o.abs_tol = opts.rel_tol;
  o.max_step = opts.max_step_cycles * p.period();
  ode::Dop853 stepper(9, o);
  std::array<double, 9> y{};
  store(initial.position, y.data());
  store(initial.momentum, y.data() + 3);
  store(initial.spin, y.data() + 6);

  IntegrationStats stats;
  ClassicalState st = initial;
  double t = initial.time;
  auto emit = [&]() {
    st.time = t;
    st.position = load(y.data());
    st.momentum = load(y.data() + 3);
    st.spin = load(y.data() + 6);
    stats.max_spin_drift = std::max(stats.max_spin_drift, spin_drift(st.spin));
    if (observer) observer(st);
  };
  emit();
  const double stride = p.period() / opts.samples_per_cycle;
  for (auto i = static_cast<long long>(std::floor(t / stride + 1e-9)) + 1; t < p.total_time; ++i) {
    double target = std::min(p.total_time, static_cast<double>(i) * stride);
    if (p.total_time - target < 1e-9 * stride) target = p.total_time;
    stepper.advance(rhs, t, y, target);
    emit();
  }
  stats.steps = stepper.stats().accepted;
  stats.rejected = stepper.stats().rejected;
  return stats;
}

EnsembleSpec EnsembleSpec::uniform(int count, double wavelength) {
  if (count < 1) throw ConfigError("ensemble count must be positive");
  EnsembleSpec e;
  e.count = count;
  e.positions.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) e.positions.push_back(wavelength * i / count);
  return e;
}

void EnsembleSpec::validate(double wavelength) const {
  if (count < 1 || positions.size() != static_cast<std::size_t>(count))
    throw ConfigError("ensemble count does not match its positions");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double expect = wavelength * static_cast<double>(i) / count;
    if (std::abs(positions[i] - expect) > 1e-9 * wavelength)
      throw ConfigError("ensemble positions must be uniform over [0, lambda)");
  }
}

double analytic_angle(EnsembleMode mode, double t, double x, const FieldParams& p) {
  require_circular(p, "analytic_angle");
  const double s = std::sin(p.k * x), c = std::cos(p.k * x);
  const double w = 2.0 * omega_pauli_internal(p) * t;
  switch (mode) {
    case EnsembleMode::B_only: return w * s * s;
    case EnsembleMode::ExA_only: return -w * c * c;
    case EnsembleMode::both_analytic: return w * (s * s - c * c);
  }
  return 0.0;
}

Vec3 ensemble_average_spin(const EnsembleSpec& spec, EnsembleMode mode, double t, const FieldParams& p) {
  spec.validate(two_pi / p.k);
  Vec3 acc{};
  for (double x : spec.positions) acc += spin_from_angle(analytic_angle(mode, t, x, p));
  return (1.0 / spec.count) * acc;
}

double ensemble_average_angle(const EnsembleSpec& spec, EnsembleMode mode, double t, const FieldParams& p) {
  spec.validate(two_pi / p.k);
  double acc = 0.0;
  for (double x : spec.positions) acc += analytic_angle(mode, t, x, p);
  return acc / spec.count;
}

}  // namespace spinprec::classical
