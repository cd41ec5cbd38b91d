#pragma once

#include "spinprec/constants.hpp"

namespace spinprec {

/// Scale factors of the internal unit system (hbar = c = m = 1, charge in units of e).
///
/// Each member is the SI value of one internal unit, so `si = internal * scale`.
struct UnitScale {
  double length;     ///< m, reduced Compton wavelength hbar / (m c)
  double time;       ///< s, hbar / (m c^2)
  double energy;     ///< J, m c^2
  double momentum;   ///< kg m / s, m c
  double action;     ///< J s, hbar
  double electric;   ///< V / m, m^2 c^3 / (e hbar)
  double magnetic;   ///< T, electric / c
  double potential;  ///< V s / m, m c / e
  double frequency;  ///< rad / s, 1 / time

  static constexpr UnitScale from(const PhysConstants& k) {
    const double m = k.electron_mass;
    const double c = k.speed_of_light;
    const double h = k.hbar;
    const double e = k.elementary_charge;
    UnitScale s{};
    s.length = h / (m * c);
    s.time = h / (m * c * c);
    s.energy = m * c * c;
    s.momentum = m * c;
    s.action = h;
    s.electric = m * m * c * c * c / (e * h);
    s.magnetic = s.electric / c;
    s.potential = m * c / e;
    s.frequency = 1.0 / s.time;
    return s;
  }

  constexpr double length_to_internal(double m) const { return m / length; }
  constexpr double length_to_si(double x) const { return x * length; }
  constexpr double time_to_internal(double s) const { return s / time; }
  constexpr double time_to_si(double t) const { return t * time; }
  constexpr double field_to_internal(double v_per_m) const { return v_per_m / electric; }
  constexpr double field_to_si(double e) const { return e * electric; }
  constexpr double frequency_to_si(double w) const { return w * frequency; }
  constexpr double frequency_to_internal(double rad_per_s) const { return rad_per_s / frequency; }
};

inline constexpr UnitScale natural_units = UnitScale::from(codata2018);

/// Electron charge in internal units.
inline constexpr double electron_charge = -1.0;

}  // namespace spinprec
