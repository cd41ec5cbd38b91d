#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "spinprec/laser.hpp"
#include "spinprec/magnus.hpp"
#include "spinprec/propagation.hpp"

namespace spinprec::pauli {

using cplx = std::complex<double>;

/// Which pieces of the Pauli Hamiltonian are switched on. The kinetic term
/// (n k)^2 / 2 is always present.
struct Toggles {
  bool include_A_squared = true;
  bool include_sigma_dot_B = true;
  bool include_E_cross_A = false;
  /// Whether -dw/dt a0(t) enters the electric field used by the E x A term.
  bool envelope_in_e = true;

  static Toggles nonrelativistic() { return {}; }
  static Toggles relativistic() { return {true, true, true, true}; }

  /// Physics runs need the magnetic term; throws ConfigError otherwise.
  void validate() const;
};

/// Two-spinor coefficients d_n flattened as [(n + n_max) * 2 + s], s = 0 up, 1 down.
struct PauliState {
  double time = 0.0;  ///< internal units
  int n_max = 0;
  std::vector<cplx> coefficients;
};

PauliState rest_spin_up(int n_max);
double norm(const PauliState& s);
/// (1/2) sum_n d_n^dagger sigma_axis d_n, units of hbar. axis: 0=x, 1=y, 2=z.
double spin(const PauliState& s, int axis);

/// Dense row-major Hamiltonian at t over (n, spin); `p` in internal units.
std::vector<cplx> assemble_pauli_hamiltonian(double t, const FieldParams& p, int n_max, const Toggles& toggles);

/// Sparse form H(t) = diag + sum_j f_j(t) M_j with f = (|a|^2, a_y, a_z, (e x a)_x).
magnus::SparseOperator pauli_operator(const FieldParams& p, int n_max, const Toggles& toggles);
/// The four scalar coefficient functions of pauli_operator at t.
void pauli_coefficients(double t, const FieldParams& p, bool envelope_in_e, std::span<double> f);

using Observer = std::function<void(const PauliState&)>;

class Propagator {
 public:
  Propagator(const LaserConfig& cfg, int n_max, Toggles toggles, PropagationOptions opts = {});

  RunStats run(const PauliState& initial, const Observer& observer) const;

  const FieldParams& field() const { return field_; }
  int n_max() const { return n_max_; }

 private:
  LaserConfig cfg_;
  int n_max_;
  Toggles toggles_;
  PropagationOptions opts_;
  FieldParams field_;
};

}  // namespace spinprec::pauli
