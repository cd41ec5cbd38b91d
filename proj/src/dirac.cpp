#include "spinprec/dirac.hpp"

#include <cmath>
#include <sstream>

#include "spinprec/error.hpp"
#include "spinprec/magnus.hpp"
#include "spinprec/ode.hpp"

namespace spinprec::dirac {

namespace {

constexpr cplx I{0.0, 1.0};

Block4 zero_block() {
  Block4 m{};
  for (auto& row : m) row.fill(cplx{});
  return m;
}

// Dirac representation: alpha_i = [[0, sigma_i], [sigma_i, 0]], beta = diag(1, 1, -1, -1).
Block4 alpha(int axis) {
  std::array<std::array<cplx, 2>, 2> s{};
  switch (axis) {
    case 0: s = {{{0.0, 1.0}, {1.0, 0.0}}}; break;
    case 1: s = {{{0.0, -I}, {I, 0.0}}}; break;
    default: s = {{{1.0, 0.0}, {0.0, -1.0}}}; break;
  }
  Block4 m = zero_block();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      m[i][j + 2] = s[i][j];
      m[i + 2][j] = s[i][j];
    }
  return m;
}

Block4 big_sigma(int axis) {
  const Block4 a = alpha(axis);
  Block4 m = zero_block();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      m[i][j] = a[i][j + 2];
      m[i + 2][j + 2] = a[i][j + 2];
    }
  return m;
}

Spinor4 mat_vec(const Block4& m, const Spinor4& v) {
  Spinor4 r{};
  for (int i = 0; i < 4; ++i) {
    cplx acc{};
    for (int j = 0; j < 4; ++j) acc += m[i][j] * v[j];
    r[i] = acc;
  }
  return r;
}

cplx inner(const Spinor4& a, const Spinor4& b) {
  cplx acc{};
  for (int i = 0; i < 4; ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

// <a_g| M |b_h> for all g, h
Block4 sandwich(const std::array<Spinor4, 4>& a, const Block4& m, const std::array<Spinor4, 4>& b) {
  Block4 out = zero_block();
  for (int h = 0; h < 4; ++h) {
    const Spinor4 mb = mat_vec(m, b[h]);
    for (int g = 0; g < 4; ++g) out[g][h] = inner(a[g], mb);
  }
  return out;
}

}  // namespace

void BasisSpec::validate() const {
  if (n_max < 1) throw ConfigError("n_max must be at least 1");
  if (!(k > 0.0)) throw ConfigError("basis wave number must be positive");
}

double mode_energy(int n, double k) {
  const double p = n * k;
  return std::sqrt(1.0 + p * p);
}

BasisSpec basis_for(const LaserConfig& cfg, int n_max, const UnitScale& u) {
  return BasisSpec{.n_max = n_max, .k = two_pi / u.length_to_internal(cfg.wavelength)};
}

BispinorTable build_bispinors(const BasisSpec& spec) {
  spec.validate();
  BispinorTable t;
  t.spec = spec;
  t.u.resize(static_cast<std::size_t>(spec.mode_count()));
  t.energy.resize(t.u.size());
  for (int n = -spec.n_max; n <= spec.n_max; ++n) {
    const double e = mode_energy(n, spec.k);
    const double p = n * spec.k;
    const double norm = std::sqrt((e + 1.0) / (2.0 * e));
    const double r = p / (e + 1.0);
    auto& u = t.u[static_cast<std::size_t>(n + spec.n_max)];
    // sigma_x swaps the chi components
    u[pos_up] = {norm, 0.0, 0.0, norm * r};
    u[pos_down] = {0.0, norm, norm * r, 0.0};
    u[neg_up] = {0.0, -norm * r, norm, 0.0};
    u[neg_down] = {-norm * r, 0.0, 0.0, norm};
    t.energy[static_cast<std::size_t>(n + spec.n_max)] = e;
  }
  return t;
}

CouplingMatrix build_couplings(const BispinorTable& table) {
  const Block4 ay = alpha(1);
  const Block4 az = alpha(2);
  CouplingMatrix c;
  const std::size_t pairs = table.u.size() - 1;
  c.alpha_y.reserve(pairs);
  c.alpha_z.reserve(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    c.alpha_y.push_back(sandwich(table.u[i], ay, table.u[i + 1]));
    c.alpha_z.push_back(sandwich(table.u[i], az, table.u[i + 1]));
  }
  return c;
}

Block4 fw_spin_matrix(int n, int axis, const BispinorTable& table) {
  const double e = mode_energy(n, table.spec.k);
  const double p = n * table.spec.k;
  // U = (E + m + beta alpha_x p) / sqrt(2E(E + m)); beta alpha_x = [[0, s_x], [-s_x, 0]]
  Block4 fw = zero_block();
  const double scale = 1.0 / std::sqrt(2.0 * e * (e + 1.0));
  for (int i = 0; i < 4; ++i) fw[i][i] = (e + 1.0) * scale;
  fw[0][3] = p * scale;
  fw[1][2] = p * scale;
  fw[2][1] = -p * scale;
  fw[3][0] = -p * scale;

  const auto& u = table.u[static_cast<std::size_t>(n + table.spec.n_max)];
  std::array<Spinor4, 4> v{};
  for (int g = 0; g < 4; ++g) v[g] = mat_vec(fw, u[g]);
  Block4 s = sandwich(v, big_sigma(axis), v);
  for (auto& row : s)
    for (auto& x : row) x *= 0.5;
  return s;
}

std::vector<cplx> Interaction::dense() const {
  const int dim = 4 * (2 * n_max + 1);
  std::vector<cplx> m(static_cast<std::size_t>(dim) * dim);
  for (std::size_t b = 0; b < upper.size(); ++b) {
    const int r0 = static_cast<int>(b) * 4;
    const int c0 = r0 + 4;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        m[static_cast<std::size_t>((r0 + i) * dim + c0 + j)] = upper[b][i][j];
        m[static_cast<std::size_t>((c0 + j) * dim + r0 + i)] = std::conj(upper[b][i][j]);
      }
  }
  return m;
}

Amplitudes interaction_amplitudes(double t, const FieldParams& p) {
  return Amplitudes{
      .coupling = window(t, p) * electron_charge * p.amplitude / p.k,
      .sin_y = std::sin(p.omega * t),
      .sin_z = std::sin(p.omega * t - p.ellipticity),
  };
}

Interaction assemble_interaction(double t, const FieldParams& p, const BasisSpec& spec,
                                 const CouplingMatrix& couplings) {
  const Amplitudes a = interaction_amplitudes(t, p);
  Interaction v;
  v.n_max = spec.n_max;
  v.upper.resize(couplings.alpha_y.size());
  for (std::size_t b = 0; b < v.upper.size(); ++b)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        v.upper[b][i][j] =
            a.coupling * (a.sin_y * couplings.alpha_y[b][i][j] + a.sin_z * couplings.alpha_z[b][i][j]);
  return v;
}

DiracState rest_spin_up(const BasisSpec& spec) {
  DiracState s;
  s.coefficients.assign(static_cast<std::size_t>(spec.dimension()), cplx{});
  s.coefficients[static_cast<std::size_t>(spec.n_max * 4 + pos_up)] = 1.0;
  return s;
}

double norm(const DiracState& s) {
  double acc = 0.0;
  for (const auto& c : s.coefficients) acc += std::norm(c);
  return acc;
}

double negative_energy_population(const DiracState& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 3 < s.coefficients.size(); i += 4)
    acc += std::norm(s.coefficients[i + neg_up]) + std::norm(s.coefficients[i + neg_down]);
  return acc;
}

double spin_z(const DiracState& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 3 < s.coefficients.size(); i += 4)
    acc += std::norm(s.coefficients[i + pos_up]) + std::norm(s.coefficients[i + neg_up]) -
           std::norm(s.coefficients[i + pos_down]) - std::norm(s.coefficients[i + neg_down]);
  return 0.5 * acc;
}

SpinOperator spin_operator(int axis, const BispinorTable& table) {
  SpinOperator op;
  op.n_max = table.spec.n_max;
  for (int n = -op.n_max; n <= op.n_max; ++n) op.blocks.push_back(fw_spin_matrix(n, axis, table));
  return op;
}

double SpinOperator::expectation(const DiracState& s) const {
  double acc = 0.0;
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    const Block4& b = blocks[m];
    const cplx* c = &s.coefficients[4 * m];
    for (int i = 0; i < 4; ++i) {
      cplx row{};
      for (int j = 0; j < 4; ++j) row += b[i][j] * c[j];
      acc += (std::conj(c[i]) * row).real();
    }
  }
  return acc;
}

double spin_y(const DiracState& s, const BispinorTable& table) { return spin_operator(1, table).expectation(s); }

Propagator::Propagator(const LaserConfig& cfg, const BasisSpec& spec, PropagationOptions opts)
    : cfg_(cfg), spec_(spec), opts_(opts) {
  cfg_.validate();
  spec_.validate();
  opts_.validate();
  field_ = internal_params(cfg_);
  table_ = build_bispinors(spec_);
  couplings_ = build_couplings(table_);
}

namespace {

// Right-hand side of the interaction-picture equation
//   d b / dt = -i e^{+iEt} V(t) e^{-iEt} b,   c = e^{-iEt} b
class InteractionPictureRhs {
 public:
  InteractionPictureRhs(const FieldParams& field, const BispinorTable& table, const CouplingMatrix& cm)
      : field_(field), table_(table), cm_(cm), modes_(table.u.size()), phase_(modes_), lab_(modes_ * 4),
        out_(modes_ * 4) {}

  void operator()(double t, std::span<const double> y, std::span<double> dy) {
    const auto* b = reinterpret_cast<const cplx*>(y.data());
    auto* db = reinterpret_cast<cplx*>(dy.data());
    const Amplitudes a = interaction_amplitudes(t, field_);
    for (std::size_t m = 0; m < modes_; ++m) {
      const double arg = table_.energy[m] * t;
      phase_[m] = {std::cos(arg), -std::sin(arg)};  // e^{-iE t}
    }
    for (std::size_t m = 0; m < modes_; ++m) {
      const cplx ph = phase_[m];
      const cplx phc = std::conj(ph);
      lab_[4 * m + 0] = ph * b[4 * m + 0];
      lab_[4 * m + 1] = ph * b[4 * m + 1];
      lab_[4 * m + 2] = phc * b[4 * m + 2];
      lab_[4 * m + 3] = phc * b[4 * m + 3];
    }
    std::fill(out_.begin(), out_.end(), cplx{});
    if (a.coupling != 0.0) {
      const double fy = a.coupling * a.sin_y;
      const double fz = a.coupling * a.sin_z;
      for (std::size_t p = 0; p + 1 < modes_; ++p) {
        const Block4& my = cm_.alpha_y[p];
        const Block4& mz = cm_.alpha_z[p];
        const cplx* lo = &lab_[4 * p];
        const cplx* hi = &lab_[4 * (p + 1)];
        cplx* out_lo = &out_[4 * p];
        cplx* out_hi = &out_[4 * (p + 1)];
        for (int i = 0; i < 4; ++i) {
          for (int j = 0; j < 4; ++j) {
            const cplx v = fy * my[i][j] + fz * mz[i][j];
            out_lo[i] += v * hi[j];
            out_hi[j] += std::conj(v) * lo[i];
          }
        }
      }
    }
    for (std::size_t m = 0; m < modes_; ++m) {
      const cplx ph = phase_[m];
      const cplx phc = std::conj(ph);
      // -i e^{+iEt}: positive branch uses conj(e^{-iEt})
      db[4 * m + 0] = -I * phc * out_[4 * m + 0];
      db[4 * m + 1] = -I * phc * out_[4 * m + 1];
      db[4 * m + 2] = -I * ph * out_[4 * m + 2];
      db[4 * m + 3] = -I * ph * out_[4 * m + 3];
    }
  }

 private:
  const FieldParams& field_;
  const BispinorTable& table_;
  const CouplingMatrix& cm_;
  std::size_t modes_;
  std::vector<cplx> phase_;
  std::vector<cplx> lab_;
  std::vector<cplx> out_;
};

void to_lab(double t, const BispinorTable& table, std::span<const cplx> b, std::vector<cplx>& c) {
  const std::size_t modes = table.u.size();
  c.resize(modes * 4);
  for (std::size_t m = 0; m < modes; ++m) {
    const double arg = table.energy[m] * t;
    const cplx ph{std::cos(arg), -std::sin(arg)};
    c[4 * m + 0] = ph * b[4 * m + 0];
    c[4 * m + 1] = ph * b[4 * m + 1];
    c[4 * m + 2] = std::conj(ph) * b[4 * m + 2];
    c[4 * m + 3] = std::conj(ph) * b[4 * m + 3];
  }
}

void to_interaction(double t, const BispinorTable& table, std::span<const cplx> c, std::span<cplx> b) {
  const std::size_t modes = table.u.size();
  for (std::size_t m = 0; m < modes; ++m) {
    const double arg = table.energy[m] * t;
    const cplx ph{std::cos(arg), std::sin(arg)};  // e^{+iEt}
    b[4 * m + 0] = ph * c[4 * m + 0];
    b[4 * m + 1] = ph * c[4 * m + 1];
    b[4 * m + 2] = std::conj(ph) * c[4 * m + 2];
    b[4 * m + 3] = std::conj(ph) * c[4 * m + 3];
  }
}

double edge_population(const DiracState& s, int n_max) {
  const std::size_t hi = static_cast<std::size_t>(2 * n_max) * 4;
  double acc = 0.0;
  for (int g = 0; g < 4; ++g) acc += std::norm(s.coefficients[g]) + std::norm(s.coefficients[hi + g]);
  return acc;
}


magnus::SparseOperator lab_frame_operator(const BispinorTable& table, const CouplingMatrix& cm, double bound) {
  const int modes = static_cast<int>(table.u.size());
  std::vector<double> diag(static_cast<std::size_t>(modes) * 4);
  for (int m = 0; m < modes; ++m)
    for (int g = 0; g < 4; ++g) diag[4 * m + g] = (g < 2 ? 1.0 : -1.0) * table.energy[m];
  magnus::SparseBuilder b(modes * 4, 2);
  for (int p = 0; p + 1 < modes; ++p)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const int r = 4 * p + i, c = 4 * (p + 1) + j;
        b.add(0, r, c, cm.alpha_y[p][i][j]);
        b.add(0, c, r, std::conj(cm.alpha_y[p][i][j]));
        b.add(1, r, c, cm.alpha_z[p][i][j]);
        b.add(1, c, r, std::conj(cm.alpha_z[p][i][j]));
      }
  return b.build(std::move(diag), {bound, bound});
}

}  // namespace

RunStats Propagator::run_dop853(const DiracState& initial, const Observer& observer) const {
  const std::size_t dim = static_cast<std::size_t>(spec_.dimension());
  const double period = field_.period();
  const double t_end = field_.total_time;
  const double stride = period / opts_.samples_per_cycle;

  ode::Options o;
  o.rel_tol = opts_.rel_tol;
  o.abs_tol = opts_.rel_tol;
  o.max_step = opts_.max_step_cycles * period;
  ode::Dop853 stepper(2 * dim, o);
  InteractionPictureRhs rhs(field_, table_, couplings_);

  std::vector<double> y(2 * dim);
  auto* b = reinterpret_cast<cplx*>(y.data());
  double t = initial.time;
  to_interaction(t, table_, initial.coefficients, std::span<cplx>(b, dim));

  RunStats stats;
  DiracState snap;
  auto emit = [&]() {
    snap.time = t;
    to_lab(t, table_, std::span<const cplx>(b, dim), snap.coefficients);
    const double nrm = norm(snap);
    stats.max_norm_drift = std::max(stats.max_norm_drift, std::abs(nrm - 1.0));
    stats.max_edge_population = std::max(stats.max_edge_population, edge_population(snap, spec_.n_max));
    if (observer) observer(snap);
  };

  emit();
  auto next_index = static_cast<long long>(std::floor(t / stride)) + 1;
  while (t < t_end) {
    double target = static_cast<double>(next_index) * stride;
    if (target > t_end || t_end - target < 1e-9 * stride) target = t_end;
    stepper.advance(rhs, t, y, target);
    ++next_index;
    emit();
  }
  stats.steps = stepper.stats().accepted;
  stats.rejected = stepper.stats().rejected;
  stats.evaluations = stepper.stats().evaluations;
  stats.final_negative_population = negative_energy_population(snap);
  return stats;
}


RunStats Propagator::run(const DiracState& initial, const Observer& observer) const {
  const std::size_t dim = static_cast<std::size_t>(spec_.dimension());
  if (initial.coefficients.size() != dim) throw SolverError("initial state does not match the basis");
  if (std::abs(norm(initial) - 1.0) > 1e-12) throw SolverError("initial state is not normalized");
  if (initial.time < 0.0 || initial.time > field_.total_time) throw SolverError("initial time outside the pulse");
  return opts_.integrator == Integrator::dop853 ? run_dop853(initial, observer) : run_magnus(initial, observer);
}

RunStats Propagator::run_magnus(const DiracState& initial, const Observer& observer) const {
  const double period = field_.period();
  const double t_end = field_.total_time;
  const double stride = period / opts_.samples_per_cycle;
  const int substeps = opts_.steps_per_cycle / opts_.samples_per_cycle;

  magnus::Cfme4 stepper(lab_frame_operator(table_, couplings_, std::abs(field_.amplitude / field_.k)));
  auto coeffs = [this](double t, std::span<double> f) {
    const Amplitudes a = interaction_amplitudes(t, field_);
    f[0] = a.coupling * a.sin_y;
    f[1] = a.coupling * a.sin_z;
  };

  RunStats stats;
  DiracState state = initial;
  auto emit = [&]() {
    const double nrm = norm(state);
    if (!std::isfinite(nrm)) {
      std::ostringstream msg;
      msg << "propagation diverged at t = " << state.time;
      throw SolverError(msg.str());
    }
    stats.max_norm_drift = std::max(stats.max_norm_drift, std::abs(nrm - 1.0));
    stats.max_edge_population = std::max(stats.max_edge_population, edge_population(state, spec_.n_max));
    if (observer) observer(state);
  };

  emit();
  stats.steps = run_snapshots(stepper, std::span<cplx>(state.coefficients), state.time, t_end, stride, substeps,
                              coeffs, emit);
  stats.evaluations = stepper.matvecs();
  stats.final_negative_population = negative_energy_population(state);
  return stats;
}

}  // namespace spinprec::dirac
