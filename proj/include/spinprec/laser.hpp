#pragma once

#include "spinprec/constants.hpp"
#include "spinprec/units.hpp"
#include "spinprec/vec3.hpp"

namespace spinprec {

/// Two counterpropagating beams of equal wavelength and amplitude, opposite helicity.
/// All quantities SI.
struct LaserConfig {
  double wavelength = 0.992e-10;   ///< m
  double peak_field = 1.38e14;     ///< V / m
  double ellipticity = pi / 2.0;   ///< rad, 0 linear, pi/2 circular
  double ramp_cycles = 20.0;       ///< sin^2 turn-on (and turn-off) duration in laser periods
  double total_cycles = 100.0;     ///< pulse duration in laser periods

  /// Throws ConfigError naming the violated constraint.
  void validate() const;

  double wave_number() const { return two_pi / wavelength; }
  double angular_frequency(const PhysConstants& k = codata2018) const {
    return wave_number() * k.speed_of_light;
  }
  double period(const PhysConstants& k = codata2018) const {
    return wavelength / k.speed_of_light;
  }
  double intensity(const PhysConstants& k = codata2018) const {
    return k.vacuum_permittivity * k.speed_of_light * peak_field * peak_field;
  }
};

/// Unit-system-agnostic field parameters. The same formulas serve SI evaluation
/// (physics-level API) and the internal units used by the solvers.
struct FieldParams {
  double k;            ///< wave number
  double omega;        ///< angular frequency, omega = k c
  double c;            ///< speed of light
  double amplitude;    ///< peak electric field per beam
  double ellipticity;  ///< rad
  double ramp_time;    ///< Delta T
  double total_time;   ///< T

  double period() const { return two_pi / omega; }
};

FieldParams si_params(const LaserConfig& cfg, const PhysConstants& k = codata2018);
FieldParams internal_params(const LaserConfig& cfg, const UnitScale& u = natural_units);

/// sin^2 turn-on, plateau, sin^2 turn-off. Throws DomainError for t outside [0, T].
double window(double t, const FieldParams& p);
/// dw/dt, same domain as window().
double window_rate(double t, const FieldParams& p);

double window(double t_seconds, const LaserConfig& cfg);

enum class Beam { first = 1, second = 2 };

struct Fields {
  Vec3 E;  ///< electric field
  Vec3 B;  ///< magnetic field
  Vec3 A;  ///< Coulomb-gauge vector potential
};

/// Continuous-wave plane-wave fields of one beam (no window). Beam 1 travels
/// along +x, beam 2 along -x.
Fields beam_fields(Beam beam, const Vec3& r, double t, const FieldParams& p);
Fields beam_fields(Beam beam, const Vec3& r, double t_seconds, const LaserConfig& cfg);

/// Windowed vector potential of the standing wave,
/// A = -(2 w E0 / omega) cos(kx) (sin(wt) e_y + sin(wt - eta) e_z).
Vec3 combined_potential(const Vec3& r, double t, const FieldParams& p);
Vec3 combined_potential(const Vec3& r, double t_seconds, const LaserConfig& cfg);

/// Standing-wave decomposition A(x, t) = a(t) cos(kx), E(x, t) = e(t) cos(kx).
/// Only the y and z components are populated.
struct StandingWave {
  Vec3 a;  ///< vector-potential amplitude (windowed)
  Vec3 e;  ///< electric amplitude, -da/dt
};

/// `envelope_in_e` selects whether -dw/dt a0(t) enters e(t).
StandingWave standing_wave(double t, const FieldParams& p, bool envelope_in_e = true);

/// Continuous-wave amplitudes (w = 1), defined for every t.
StandingWave standing_wave_cw(double t, const FieldParams& p);

/// Windowed combined E, B = curl A and A at (r, t).
Fields combined_fields(const Vec3& r, double t, const FieldParams& p, bool envelope_in_e = true);

enum class SpinDensity {
  per_beam,        ///< eps0 E_1 x A_1 (equal for both beams)
  total,           ///< eps0 (E_1 x A_1 + E_2 x A_2)
  combined_field,  ///< eps0 (E_1 + E_2) x (A_1 + A_2)
};

/// Photonic spin density of the continuous-wave beams, J s / m^3.
Vec3 photon_spin_density(SpinDensity which, const Vec3& r, double t_seconds, const LaserConfig& cfg,
                         const PhysConstants& k = codata2018);

}  // namespace spinprec
