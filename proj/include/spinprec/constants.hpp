#pragma once

#include <numbers>

namespace spinprec {

/// Fundamental constants in SI units.
struct PhysConstants {
  double electron_mass;        ///< kg
  double elementary_charge;    ///< C (magnitude; the electron charge is -e)
  double speed_of_light;       ///< m / s
  double hbar;                 ///< J s
  double vacuum_permittivity;  ///< F / m
};

/// CODATA 2018 recommended values.
inline constexpr PhysConstants codata2018{
    .electron_mass = 9.1093837015e-31,
    .elementary_charge = 1.602176634e-19,
    .speed_of_light = 299792458.0,
    .hbar = 6.62607015e-34 / (2.0 * std::numbers::pi),
    .vacuum_permittivity = 8.8541878128e-12,
};

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace spinprec
