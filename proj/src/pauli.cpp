#include "spinprec/pauli.hpp"

#include <cmath>
#include <sstream>

#include "spinprec/error.hpp"

namespace spinprec::pauli {

namespace {

constexpr cplx I{0.0, 1.0};
using Mat2 = std::array<std::array<cplx, 2>, 2>;

constexpr Mat2 sigma_x{{{0.0, 1.0}, {1.0, 0.0}}};
constexpr Mat2 sigma_y{{{0.0, -I}, {I, 0.0}}};
constexpr Mat2 sigma_z{{{1.0, 0.0}, {0.0, -1.0}}};
constexpr Mat2 unit2{{{1.0, 0.0}, {0.0, 1.0}}};

enum Term : std::size_t { a_squared = 0, a_y = 1, a_z = 2, e_cross_a = 3 };

int index(int n, int s, int n_max) { return (n + n_max) * 2 + s; }

// Adds factor * m between modes n (row) and n + dn (column) for every valid n.
void couple(magnus::SparseBuilder& b, std::size_t term, int n_max, int dn, cplx factor, const Mat2& m) {
  for (int n = -n_max; n <= n_max; ++n) {
    const int np = n + dn;
    if (np < -n_max || np > n_max) continue;
    for (int s = 0; s < 2; ++s)
      for (int sp = 0; sp < 2; ++sp) b.add(term, index(n, s, n_max), index(np, sp, n_max), factor * m[s][sp]);
  }
}

}  // namespace

void Toggles::validate() const {
  if (!include_sigma_dot_B) throw ConfigError("pauli toggles: include_sigma_dot_B must be enabled");
}

PauliState rest_spin_up(int n_max) {
  if (n_max < 1) throw ConfigError("n_max must be at least 1");
  PauliState s;
  s.n_max = n_max;
  s.coefficients.assign(static_cast<std::size_t>(2 * (2 * n_max + 1)), cplx{});
  s.coefficients[static_cast<std::size_t>(index(0, 0, n_max))] = 1.0;
  return s;
}

double norm(const PauliState& s) {
  double acc = 0.0;
  for (const auto& c : s.coefficients) acc += std::norm(c);
  return acc;
}

double spin(const PauliState& s, int axis) {
  const Mat2& m = axis == 0 ? sigma_x : axis == 1 ? sigma_y : sigma_z;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < s.coefficients.size(); i += 2) {
    const cplx u = s.coefficients[i], d = s.coefficients[i + 1];
    acc += (std::conj(u) * (m[0][0] * u + m[0][1] * d) + std::conj(d) * (m[1][0] * u + m[1][1] * d)).real();
  }
  return 0.5 * acc;
}

// H = (p - qA)^2 / 2 - (q/2) sigma.B + (q^2/4) sigma.(E x A), hbar = m = c = 1.
// With A = a(t) cos kx, B = k sin kx (0, a_z, -a_y) and E = e(t) cos kx:
//   cos^2 kx  -> 1/2 on dn = 0 and 1/4 on dn = +-2,
//   sin kx    -> 1/(2i) on dn = -1 (row n, column n - 1) and -1/(2i) on dn = +1.
// The p.A cross term needs transverse momentum and vanishes in this basis.
magnus::SparseOperator pauli_operator(const FieldParams& p, int n_max, const Toggles& toggles) {
  if (n_max < 1) throw ConfigError("n_max must be at least 1");
  const double q = electron_charge;
  const int dim = 2 * (2 * n_max + 1);
  std::vector<double> diag(static_cast<std::size_t>(dim));
  for (int n = -n_max; n <= n_max; ++n)
    for (int s = 0; s < 2; ++s) diag[index(n, s, n_max)] = 0.5 * (n * p.k) * (n * p.k);

  magnus::SparseBuilder b(dim, 4);
  if (toggles.include_A_squared) {
    couple(b, a_squared, n_max, 0, q * q / 4.0, unit2);
    couple(b, a_squared, n_max, 2, q * q / 8.0, unit2);
    couple(b, a_squared, n_max, -2, q * q / 8.0, unit2);
  }
  if (toggles.include_sigma_dot_B) {
    // -(q/2) k sin kx (a_z sigma_y - a_y sigma_z)
    const cplx down = 1.0 / (2.0 * I), up = -1.0 / (2.0 * I);
    const double pre = -0.5 * q * p.k;
    couple(b, a_z, n_max, -1, pre * down, sigma_y);
    couple(b, a_z, n_max, 1, pre * up, sigma_y);
    couple(b, a_y, n_max, -1, -pre * down, sigma_z);
    couple(b, a_y, n_max, 1, -pre * up, sigma_z);
  }
  if (toggles.include_E_cross_A) {
    couple(b, e_cross_a, n_max, 0, q * q / 8.0, sigma_x);
    couple(b, e_cross_a, n_max, 2, q * q / 16.0, sigma_x);
    couple(b, e_cross_a, n_max, -2, q * q / 16.0, sigma_x);
  }

  // Bounds over the pulse: |a_i| <= 2E0/omega, |e_i| <= 2E0 (1 + max|dw/dt| / omega).
  const double a_max = 2.0 * p.amplitude / p.omega;
  const double e_max = 2.0 * p.amplitude * (1.0 + 0.5 * pi / (p.ramp_time * p.omega));
  const double bounds_a2 = 2.0 * a_max * a_max;
  const double bounds_ea = 2.0 * a_max * e_max;
  return b.build(std::move(diag), {bounds_a2, a_max, a_max, bounds_ea});
}

void pauli_coefficients(double t, const FieldParams& p, bool envelope_in_e, std::span<double> f) {
  const StandingWave sw = standing_wave(t, p, envelope_in_e);
  f[a_squared] = dot(sw.a, sw.a);
  f[a_y] = sw.a.y;
  f[a_z] = sw.a.z;
  f[e_cross_a] = cross(sw.e, sw.a).x;
}

std::vector<cplx> assemble_pauli_hamiltonian(double t, const FieldParams& p, int n_max, const Toggles& toggles) {
  if (t < 0.0 || t > p.total_time) throw DomainError("pauli hamiltonian: t outside the pulse");
  const magnus::SparseOperator op = pauli_operator(p, n_max, toggles);
  double f[4];
  pauli_coefficients(t, p, toggles.envelope_in_e, f);
  const auto dim = static_cast<std::size_t>(op.dim);
  std::vector<cplx> h(dim * dim);
  for (std::size_t r = 0; r < dim; ++r) {
    h[r * dim + r] += op.diagonal[r];
    for (int e = op.row_ptr[r]; e < op.row_ptr[r + 1]; ++e)
      for (std::size_t j = 0; j < 4; ++j) h[r * dim + op.col[e]] += f[j] * op.values[j][e];
  }
  return h;
}

Propagator::Propagator(const LaserConfig& cfg, int n_max, Toggles toggles, PropagationOptions opts)
    : cfg_(cfg), n_max_(n_max), toggles_(toggles), opts_(opts) {
  cfg_.validate();
  toggles_.validate();
  opts_.validate();
  if (n_max_ < 1) throw ConfigError("n_max must be at least 1");
  if (opts_.integrator != Integrator::magnus) throw ConfigError("the pauli solver supports the magnus integrator only");
  field_ = internal_params(cfg_);
}

RunStats Propagator::run(const PauliState& initial, const Observer& observer) const {
  if (initial.n_max != n_max_ || initial.coefficients.size() != static_cast<std::size_t>(2 * (2 * n_max_ + 1)))
    throw SolverError("initial state does not match the basis");
  if (std::abs(norm(initial) - 1.0) > 1e-12) throw SolverError("initial state is not normalized");
  if (initial.time < 0.0 || initial.time > field_.total_time) throw SolverError("initial time outside the pulse");

  magnus::Cfme4 stepper(pauli_operator(field_, n_max_, toggles_));
  const bool envelope = toggles_.envelope_in_e;
  auto coeffs = [&](double t, std::span<double> f) { pauli_coefficients(t, field_, envelope, f); };

  RunStats stats;
  PauliState state = initial;
  const std::size_t last = state.coefficients.size() - 2;
  auto emit = [&]() {
    const double nrm = norm(state);
    if (!std::isfinite(nrm)) {
      std::ostringstream msg;
      msg << "pauli propagation diverged at t = " << state.time;
      throw SolverError(msg.str());
    }
    stats.max_norm_drift = std::max(stats.max_norm_drift, std::abs(nrm - 1.0));
    const auto& c = state.coefficients;
    const double edge = std::norm(c[0]) + std::norm(c[1]) + std::norm(c[last]) + std::norm(c[last + 1]);
    stats.max_edge_population = std::max(stats.max_edge_population, edge);
    if (observer) observer(state);
  };

  emit();
  const double stride = field_.period() / opts_.samples_per_cycle;
  stats.steps = run_snapshots(stepper, std::span<cplx>(state.coefficients), state.time, field_.total_time, stride,
                              opts_.steps_per_cycle / opts_.samples_per_cycle, coeffs, emit);
  stats.evaluations = stepper.matvecs();
  return stats;
}

}  // namespace spinprec::pauli
