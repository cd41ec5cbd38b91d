// Independent reference implementations used by the tests. Nothing here calls
// into the library's solvers: Hamiltonians are rebuilt from the field formulas
// in the plain spinor basis and propagated with dense matrix exponentials.
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// CODATA 2018, typed in again rather than taken from the library.
inline constexpr double m_e = 9.1093837015e-31;
inline constexpr double e_charge = 1.602176634e-19;
inline constexpr double c_light = 299792458.0;
inline constexpr double hbar = 6.62607015e-34 / (2.0 * pi);
inline constexpr double eps0 = 8.8541878128e-12;

/// Field strength unit m^2 c^3 / (e hbar) in V/m.
inline double schwinger_field() { return m_e * m_e * c_light * c_light * c_light / (e_charge * hbar); }

/// Pulse parameters in units hbar = c = m = 1.
struct Pulse {
  double k;       ///< wave number (= omega)
  double amp;     ///< peak field per beam
  double eta;     ///< ellipticity
  double ramp;    ///< ramp duration
  double total;   ///< pulse duration
  double period() const { return 2.0 * pi / k; }
};

inline Pulse make_pulse(double wavelength_m, double field_V_per_m, double eta, double ramp_cycles,
                        double total_cycles) {
  const double lambda_c = hbar / (m_e * c_light);
  Pulse p{};
  p.k = 2.0 * pi * lambda_c / wavelength_m;
  p.amp = field_V_per_m / schwinger_field();
  p.eta = eta;
  p.ramp = ramp_cycles * p.period();
  p.total = total_cycles * p.period();
  return p;
}

inline double envelope(double t, const Pulse& p) {
  if (t < p.ramp) return std::pow(std::sin(pi * t / (2.0 * p.ramp)), 2);
  if (t > p.total - p.ramp) return std::pow(std::sin(pi * (p.total - t) / (2.0 * p.ramp)), 2);
  return 1.0;
}

inline double envelope_rate(double t, const Pulse& p) {
  if (t < p.ramp) return pi / (2.0 * p.ramp) * std::sin(pi * t / p.ramp);
  if (t > p.total - p.ramp) return -pi / (2.0 * p.ramp) * std::sin(pi * (p.total - t) / p.ramp);
  return 0.0;
}

/// a(t) of A = a cos kx, (y, z) components.
inline Eigen::Vector2d potential_amplitude(double t, const Pulse& p) {
  const double s = -2.0 * envelope(t, p) * p.amp / p.k;
  return {s * std::sin(p.k * t), s * std::sin(p.k * t - p.eta)};
}

/// e(t) = -da/dt including the envelope derivative.
inline Eigen::Vector2d electric_amplitude(double t, const Pulse& p) {
  const double w = envelope(t, p), dw = envelope_rate(t, p);
  const double c = 2.0 * p.amp / p.k;
  return {c * (dw * std::sin(p.k * t) + w * p.k * std::cos(p.k * t)),
          c * (dw * std::sin(p.k * t - p.eta) + w * p.k * std::cos(p.k * t - p.eta))};
}

inline Mat pauli_matrix(int axis) {
  Mat s = Mat::Zero(2, 2);
  if (axis == 0) s << 0, 1, 1, 0;
  if (axis == 1) s << 0, -I, I, 0;
  if (axis == 2) s << 1, 0, 0, -1;
  return s;
}

/// Dirac alpha_i (axis 0..2) and beta in the standard representation.
inline Mat dirac_alpha(int axis) {
  Mat a = Mat::Zero(4, 4);
  a.block(0, 2, 2, 2) = pauli_matrix(axis);
  a.block(2, 0, 2, 2) = pauli_matrix(axis);
  return a;
}

inline Mat dirac_beta() {
  Mat b = Mat::Zero(4, 4);
  b.diagonal() << 1, 1, -1, -1;
  return b;
}

/// Free Dirac matrix at momentum n k along x.
inline Mat free_dirac(int n, double k) { return n * k * dirac_alpha(0) + dirac_beta(); }

/// Dense Dirac Hamiltonian over plane waves n in [-n_max, n_max], each carrying
/// a plain 4-spinor. H = alpha.(p - qA) + beta with q = -1 and A = a cos kx.
inline Mat dirac_hamiltonian(double t, const Pulse& p, int n_max) {
  const int modes = 2 * n_max + 1;
  Mat h = Mat::Zero(4 * modes, 4 * modes);
  const Eigen::Vector2d a = potential_amplitude(t, p);
  const double q = -1.0;
  // -q alpha.A with cos kx = (e^{ikx} + e^{-ikx}) / 2
  const Mat v = (-q * 0.5) * (a[0] * dirac_alpha(1) + a[1] * dirac_alpha(2));
  for (int i = 0; i < modes; ++i) {
    h.block(4 * i, 4 * i, 4, 4) = free_dirac(i - n_max, p.k);
    if (i + 1 < modes) {
      h.block(4 * i, 4 * (i + 1), 4, 4) = v;
      h.block(4 * (i + 1), 4 * i, 4, 4) = v;
    }
  }
  return h;
}

struct PauliTerms {
  bool a_squared = true;
  bool sigma_b = true;
  bool e_cross_a = false;
};

/// Dense Pauli Hamiltonian over (n, spin):
/// H = (p - qA)^2 / 2 - (q/2) sigma.B + (q^2/4) sigma.(E x A), m = 1.
inline Mat pauli_hamiltonian(double t, const Pulse& p, int n_max, PauliTerms terms) {
  const int modes = 2 * n_max + 1;
  const double q = -1.0;
  const Eigen::Vector2d a = potential_amplitude(t, p);
  const Eigen::Vector2d e = electric_amplitude(t, p);
  const double a2 = a.squaredNorm();
  const double exa = e[0] * a[1] - e[1] * a[0];  // x component of e x a
  Mat h = Mat::Zero(2 * modes, 2 * modes);
  const Mat id = Mat::Identity(2, 2);
  auto add = [&](int row, int col, const Mat& blk) {
    if (row < 0 || col < 0 || row >= modes || col >= modes) return;
    h.block(2 * row, 2 * col, 2, 2) += blk;
  };
  // B = (0, k a_z sin kx, -k a_y sin kx); sin kx = (e^{ikx} - e^{-ikx}) / (2i)
  const Mat sigma_b = p.k * (a[1] * pauli_matrix(1) - a[0] * pauli_matrix(2));
  for (int i = 0; i < modes; ++i) {
    const double nk = (i - n_max) * p.k;
    add(i, i, 0.5 * nk * nk * id);
    if (terms.a_squared) {
      // (q^2/2) |a|^2 cos^2 kx, cos^2 kx = 1/2 + (e^{2ikx} + e^{-2ikx}) / 4
      add(i, i, 0.25 * q * q * a2 * id);
      add(i, i + 2, 0.125 * q * q * a2 * id);
      add(i, i - 2, 0.125 * q * q * a2 * id);
    }
    if (terms.sigma_b) {
      const Mat up = (-0.5 * q) * sigma_b / (2.0 * I);  // <i| e^{ikx} |i-1>
      add(i, i - 1, up);
      add(i, i + 1, -up);
    }
    if (terms.e_cross_a) {
      const Mat sx = 0.25 * q * q * exa * pauli_matrix(0);
      add(i, i, 0.5 * sx);
      add(i, i + 2, 0.25 * sx);
      add(i, i - 2, 0.25 * sx);
    }
  }
  return h;
}

/// Fourth-order Magnus step with the commutator term, evaluated with a dense
/// Pade matrix exponential. For psi' = A psi with A = -iH the generator is
/// (h/2)(A1 + A2) + (sqrt(3)/12) h^2 [A2, A1] = -i(h/2)(H1 + H2) - (sqrt(3)/12) h^2 [H2, H1].
template <class H>
Vec magnus4(H&& hamiltonian, Vec psi, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * h;
    const Mat h1 = hamiltonian(t + c1 * h);
    const Mat h2 = hamiltonian(t + c2 * h);
    const Mat omega = (-I * h * 0.5) * (h1 + h2) - (std::sqrt(3.0) / 12.0 * h * h) * (h2 * h1 - h1 * h2);
    psi = omega.exp() * psi;
  }
  return psi;
}

/// Lab-frame index of (mode n, spinor component) in the dense bases above.
inline int index4(int n, int comp, int n_max) { return 4 * (n + n_max) + comp; }
inline int index2(int n, int spin, int n_max) { return 2 * (n + n_max) + spin; }

/// Closed-form precession frequencies in SI, typed directly from the formulas.
inline double omega_dirac_si(double lambda, double field, double eta) {
  const double qE = e_charge * field;
  return std::pow(qE, 4) * std::pow(lambda, 5) /
         (std::pow(2.0 * pi, 5) * hbar * hbar * m_e * m_e * std::pow(c_light, 5)) * std::sin(eta);
}

inline double omega_pauli_si(double lambda, double field) {
  const double qE = e_charge * field;
  return qE * qE * lambda / (2.0 * pi * m_e * m_e * c_light * c_light * c_light);
}

}  // namespace oracle
