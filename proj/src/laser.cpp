#include "spinprec/laser.hpp"

#include <cmath>
#include <sstream>

#include "spinprec/error.hpp"

namespace spinprec {

void LaserConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) fail("wavelength_m must be positive");
  if (!(peak_field >= 0.0) || !std::isfinite(peak_field)) fail("peak_field_V_per_m must be non-negative");
  if (!(ellipticity >= 0.0 && ellipticity <= pi / 2.0)) fail("ellipticity_rad must lie in [0, pi/2]");
  if (!(ramp_cycles > 0.0)) fail("ramp_cycles must be positive");
  if (!(total_cycles > 0.0) || !std::isfinite(total_cycles)) fail("total_cycles must be positive");
  if (2.0 * ramp_cycles > total_cycles) fail("2 * ramp_cycles must not exceed total_cycles");
}

FieldParams si_params(const LaserConfig& cfg, const PhysConstants& k) {
  const double period = cfg.period(k);
  return FieldParams{
      .k = cfg.wave_number(),
      .omega = cfg.angular_frequency(k),
      .c = k.speed_of_light,
      .amplitude = cfg.peak_field,
      .ellipticity = cfg.ellipticity,
      .ramp_time = cfg.ramp_cycles * period,
      .total_time = cfg.total_cycles * period,
  };
}

FieldParams internal_params(const LaserConfig& cfg, const UnitScale& u) {
  const double k = two_pi / u.length_to_internal(cfg.wavelength);
  const double period = two_pi / k;
  return FieldParams{
      .k = k,
      .omega = k,
      .c = 1.0,
      .amplitude = u.field_to_internal(cfg.peak_field),
      .ellipticity = cfg.ellipticity,
      .ramp_time = cfg.ramp_cycles * period,
      .total_time = cfg.total_cycles * period,
  };
}

namespace {

void check_in_pulse(double t, const FieldParams& p) {
  if (!(t >= 0.0 && t <= p.total_time)) {
    std::ostringstream os;
    os << "time " << t << " outside pulse [0, " << p.total_time << "]";
    throw DomainError(os.str());
  }
}

}  // namespace

double window(double t, const FieldParams& p) {
  check_in_pulse(t, p);
  const double dt = p.ramp_time;
  if (t < dt) {
    const double s = std::sin(pi * t / (2.0 * dt));
    return s * s;
  }
  if (t > p.total_time - dt) {
    const double s = std::sin(pi * (p.total_time - t) / (2.0 * dt));
    return s * s;
  }
  return 1.0;
}

double window_rate(double t, const FieldParams& p) {
  check_in_pulse(t, p);
  const double dt = p.ramp_time;
  // d/dt sin^2(pi t / 2dT) = (pi / 2dT) sin(pi t / dT)
  if (t < dt) return pi / (2.0 * dt) * std::sin(pi * t / dt);
  if (t > p.total_time - dt) return -pi / (2.0 * dt) * std::sin(pi * (p.total_time - t) / dt);
  return 0.0;
}

double window(double t_seconds, const LaserConfig& cfg) { return window(t_seconds, si_params(cfg)); }

Fields beam_fields(Beam beam, const Vec3& r, double t, const FieldParams& p) {
  const double sgn = beam == Beam::first ? 1.0 : -1.0;
  const double eta = p.ellipticity;
  const double E0 = p.amplitude;
  const double phase = p.k * r.x - sgn * p.omega * t;  // kx -+ wt
  const double c1 = std::cos(phase);
  const double c2 = std::cos(phase + sgn * eta);
  const double s1 = std::sin(phase);
  const double s2 = std::sin(phase + sgn * eta);
  Fields f;
  f.E = {0.0, E0 * c1, E0 * c2};
  f.B = {0.0, -sgn * E0 / p.c * c2, sgn * E0 / p.c * c1};
  f.A = {0.0, sgn * E0 / p.omega * s1, sgn * E0 / p.omega * s2};
  return f;
}

Fields beam_fields(Beam beam, const Vec3& r, double t_seconds, const LaserConfig& cfg) {
  return beam_fields(beam, r, t_seconds, si_params(cfg));
}

namespace {

// a0(t) without the window: -(2 E0 / omega) (sin wt, sin(wt - eta))
Vec3 bare_potential_amplitude(double t, const FieldParams& p) {
  const double f = -2.0 * p.amplitude / p.omega;
  return {0.0, f * std::sin(p.omega * t), f * std::sin(p.omega * t - p.ellipticity)};
}

// -d a0 / dt = 2 E0 (cos wt, cos(wt - eta))
Vec3 bare_electric_amplitude(double t, const FieldParams& p) {
  const double f = 2.0 * p.amplitude;
  return {0.0, f * std::cos(p.omega * t), f * std::cos(p.omega * t - p.ellipticity)};
}

}  // namespace

StandingWave standing_wave(double t, const FieldParams& p, bool envelope_in_e) {
  const double w = window(t, p);
  const Vec3 a0 = bare_potential_amplitude(t, p);
  StandingWave sw;
  sw.a = w * a0;
  sw.e = w * bare_electric_amplitude(t, p);
  if (envelope_in_e) sw.e -= window_rate(t, p) * a0;
  return sw;
}

StandingWave standing_wave_cw(double t, const FieldParams& p) {
  return {bare_potential_amplitude(t, p), bare_electric_amplitude(t, p)};
}

Vec3 combined_potential(const Vec3& r, double t, const FieldParams& p) {
  return std::cos(p.k * r.x) * standing_wave(t, p, false).a;
}

Vec3 combined_potential(const Vec3& r, double t_seconds, const LaserConfig& cfg) {
  return combined_potential(r, t_seconds, si_params(cfg));
}

Fields combined_fields(const Vec3& r, double t, const FieldParams& p, bool envelope_in_e) {
  const StandingWave sw = standing_wave(t, p, envelope_in_e);
  const double ck = std::cos(p.k * r.x);
  const double sk = std::sin(p.k * r.x);
  Fields f;
  f.A = ck * sw.a;
  f.E = ck * sw.e;
  // curl of a(t) cos(kx): (0, -d_x A_z, d_x A_y) = k sin(kx) (0, a_z, -a_y)
  f.B = {0.0, p.k * sk * sw.a.z, -p.k * sk * sw.a.y};
  return f;
}

Vec3 photon_spin_density(SpinDensity which, const Vec3& r, double t_seconds, const LaserConfig& cfg,
                         const PhysConstants& k) {
  const FieldParams p = si_params(cfg, k);
  const Fields f1 = beam_fields(Beam::first, r, t_seconds, p);
  const Fields f2 = beam_fields(Beam::second, r, t_seconds, p);
  const double eps0 = k.vacuum_permittivity;
  switch (which) {
    case SpinDensity::per_beam:
      return eps0 * cross(f1.E, f1.A);
    case SpinDensity::total:
      return eps0 * (cross(f1.E, f1.A) + cross(f2.E, f2.A));
    case SpinDensity::combined_field:
      return eps0 * cross(f1.E + f2.E, f1.A + f2.A);
  }
  return {};
}

}  // namespace spinprec
