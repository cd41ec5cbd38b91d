#pragma once

#include <functional>
#include <vector>

#include "spinprec/laser.hpp"
#include "spinprec/vec3.hpp"

namespace spinprec::classical {

// All quantities in internal units (hbar = c = m = 1, q = -1); spin in units
// of hbar, so |s| = 1/2.

struct ClassicalState {
  double time = 0.0;
  Vec3 position;
  Vec3 momentum;  ///< canonical
  Vec3 spin;
};

/// Field model seen by the classical equations.
enum class Envelope {
  windowed,    ///< the pulsed standing wave used by the quantum solvers
  continuous,  ///< w = 1 for every t, as assumed by the closed forms
};

/// Standing-wave amplitudes at t under the chosen envelope.
StandingWave amplitudes(double t, const FieldParams& p, Envelope env);

/// q s x B.
Vec3 spin_torque_B(const Vec3& s, const Vec3& B);
/// -(q^2 / 2) s x (E x A).
Vec3 spin_torque_ExA(const Vec3& s, const Vec3& E, const Vec3& A);

/// Closed-form spin at fixed x from s(0) = (0, 0, 1/2) under the B torque with
/// continuous circular fields: s = (0, sin theta, cos theta) / 2, theta = 2 Omega_P t sin^2 kx.
/// Other ellipticities throw UnsupportedConfiguration.
Vec3 analytic_spin_B(double t, double x, const FieldParams& p);
/// Closed form under the E x A torque, theta = -2 Omega_P t cos^2 kx.
Vec3 analytic_spin_ExA(double t, double x, const FieldParams& p);
/// SI overloads: t in s, x in m, result in J s.
Vec3 analytic_spin_B(double t_seconds, double x_meters, const LaserConfig& cfg);
Vec3 analytic_spin_ExA(double t_seconds, double x_meters, const LaserConfig& cfg);

/// Omega_P = q^2 E0^2 / (m^2 c^3 k) in internal units.
double omega_pauli_internal(const FieldParams& p);

enum class Torque { B_only, ExA_only, both };

struct IntegrationOptions {
  double rel_tol = 1e-10;
  int samples_per_cycle = 8;
  double max_step_cycles = 1.0 / 50.0;
};

using SpinObserver = std::function<void(double t, const Vec3& s)>;
using Observer = std::function<void(const ClassicalState&)>;

struct IntegrationStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double max_spin_drift = 0.0;  ///< max | |s| - 1/2 | / (1/2)
};

/// Spin precession at fixed position x from s(0) = s0, integrated to t_end.
IntegrationStats propagate_fixed_position(double x, const Vec3& s0, double t_end, const FieldParams& p, Envelope env,
                                          Torque torque, const IntegrationOptions& opts, const SpinObserver& observer);

/// Right-hand side of the coupled trajectory and spin equations, exposed for tests.
/// y = (r, p, s).
void full_rhs(double t, const double* y, double* dy, const FieldParams& p, Envelope env);

/// Hamiltonian (p - qA)^2 / 2 - q s.B + (q^2/2) s.(E x A) at state y.
double hamiltonian(double t, const double* y, const FieldParams& p, Envelope env);

/// Electron initially at rest at the origin with spin +z.
ClassicalState rest_initial_state();

/// Coupled trajectory and spin integration over the pulse in `cfg` (windowed fields).
IntegrationStats propagate_full_classical(const ClassicalState& initial, const LaserConfig& cfg,
                                          const IntegrationOptions& opts, const Observer& observer);

struct EnsembleSpec {
  int count = 256;
  std::vector<double> positions;  ///< internal length units, uniform over one wavelength

  static EnsembleSpec uniform(int count, double wavelength);
  void validate(double wavelength) const;
};

enum class EnsembleMode { B_only, ExA_only, both_analytic };

/// Rotation angle theta(x, t) of the closed-form solutions for the mode.
double analytic_angle(EnsembleMode mode, double t, double x, const FieldParams& p);
/// Ensemble mean of the closed-form spin vectors (fixed summation order).
Vec3 ensemble_average_spin(const EnsembleSpec& spec, EnsembleMode mode, double t, const FieldParams& p);
/// Ensemble mean of the rotation angle.
double ensemble_average_angle(const EnsembleSpec& spec, EnsembleMode mode, double t, const FieldParams& p);

}  // namespace spinprec::classical
