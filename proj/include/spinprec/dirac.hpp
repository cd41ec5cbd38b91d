#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "spinprec/laser.hpp"
#include "spinprec/propagation.hpp"
#include "spinprec/units.hpp"

namespace spinprec::dirac {

using cplx = std::complex<double>;
using Spinor4 = std::array<cplx, 4>;
using Block4 = std::array<std::array<cplx, 4>, 4>;

/// Component order within one mode quadruple (matches c_n).
enum Component : int { pos_up = 0, pos_down = 1, neg_up = 2, neg_down = 3 };

/// Truncated plane-wave basis, modes n in [-n_max, n_max]. Internal units:
/// `k` is the photon wave number in units of the inverse reduced Compton wavelength.
struct BasisSpec {
  int n_max = 8;
  double k = 0.0;

  int mode_count() const { return 2 * n_max + 1; }
  int dimension() const { return 4 * mode_count(); }
  void validate() const;
};

/// Relativistic energy of mode n, sqrt(1 + (n k)^2) in units of m c^2.
double mode_energy(int n, double k);

/// Free-particle eigenspinors u_n^gamma, indexed [n + n_max][gamma].
struct BispinorTable {
  BasisSpec spec;
  std::vector<std::array<Spinor4, 4>> u;
  std::vector<double> energy;  ///< E_n per mode

  const Spinor4& at(int n, int gamma) const { return u[static_cast<std::size_t>(n + spec.n_max)][gamma]; }
};

BispinorTable build_bispinors(const BasisSpec& spec);

/// Sandwiched velocity operators <u_n|alpha_{y,z}|u_{n+1}> for every adjacent mode pair;
/// entry i belongs to the pair (n, n+1) with n = -n_max + i.
struct CouplingMatrix {
  std::vector<Block4> alpha_y;
  std::vector<Block4> alpha_z;
};

CouplingMatrix build_couplings(const BispinorTable& table);

/// Block-tridiagonal Hermitian interaction, stored as upper blocks V_{n,n+1}.
/// The lower blocks are V_{n+1,n} = V_{n,n+1}^dagger.
struct Interaction {
  int n_max = 0;
  std::vector<Block4> upper;

  /// Dense row-major dimension x dimension matrix (tests and diagnostics).
  std::vector<cplx> dense() const;
};

struct Amplitudes {
  double coupling;  ///< w(t) q E0 / k
  double sin_y;     ///< sin(omega t)
  double sin_z;     ///< sin(omega t - eta)
};

/// Time-dependent scalar factors of the interaction at t (internal units).
Amplitudes interaction_amplitudes(double t, const FieldParams& p);

/// V(t) from the precomputed couplings; `p` must be in internal units.
Interaction assemble_interaction(double t, const FieldParams& p, const BasisSpec& spec,
                                 const CouplingMatrix& couplings);

/// Lab-frame coefficients c_n(t), flattened as [(n + n_max) * 4 + gamma].
struct DiracState {
  double time = 0.0;  ///< internal units, hbar / (m c^2)
  std::vector<cplx> coefficients;
};

/// Electron at rest with spin up along z.
DiracState rest_spin_up(const BasisSpec& spec);

double norm(const DiracState& s);
double negative_energy_population(const DiracState& s);
/// Expectation of the Foldy-Wouthuysen spin along z, in units of hbar.
double spin_z(const DiracState& s);
/// Expectation of the Foldy-Wouthuysen spin along y, in units of hbar.
double spin_y(const DiracState& s, const BispinorTable& table);

/// Matrix of the FW spin operator (units of hbar) along `axis` (0=x, 1=y, 2=z)
/// between the basis spinors of mode n, built by conjugating Sigma with the
/// free-particle FW transform.
Block4 fw_spin_matrix(int n, int axis, const BispinorTable& table);

/// Precomputed per-mode blocks of one FW spin component.
struct SpinOperator {
  int n_max = 0;
  std::vector<Block4> blocks;

  double expectation(const DiracState& s) const;
};

SpinOperator spin_operator(int axis, const BispinorTable& table);

/// Observer called at t = 0 and on every snapshot, including t = T.
using Observer = std::function<void(const DiracState&)>;

/// Momentum-space Dirac propagation. The default integrator steps the lab-frame
/// coefficients with unitary Magnus exponentials; the explicit Runge-Kutta
/// alternative integrates the interaction-picture amplitudes.
class Propagator {
 public:
  Propagator(const LaserConfig& cfg, const BasisSpec& spec, PropagationOptions opts = {});

  /// Integrates from initial.time to T; `initial` must be normalized.
  RunStats run(const DiracState& initial, const Observer& observer) const;

  const BasisSpec& basis() const { return spec_; }
  const BispinorTable& bispinors() const { return table_; }
  const CouplingMatrix& couplings() const { return couplings_; }
  const FieldParams& field() const { return field_; }

 private:
  RunStats run_magnus(const DiracState& initial, const Observer& observer) const;
  RunStats run_dop853(const DiracState& initial, const Observer& observer) const;

  LaserConfig cfg_;
  BasisSpec spec_;
  PropagationOptions opts_;
  FieldParams field_;
  BispinorTable table_;
  CouplingMatrix couplings_;
};

/// Basis spec matching a laser config with the given truncation.
BasisSpec basis_for(const LaserConfig& cfg, int n_max, const UnitScale& u = natural_units);

}  // namespace spinprec::dirac
