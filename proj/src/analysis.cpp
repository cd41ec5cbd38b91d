#include "spinprec/analysis.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "spinprec/dirac.hpp"
#include "spinprec/error.hpp"

namespace spinprec::analysis {

std::string_view to_string(Theory t) {
  switch (t) {
    case Theory::dirac: return "dirac";
    case Theory::pauli_rel: return "pauli-rel";
    case Theory::pauli_nonrel: return "pauli-nonrel";
    case Theory::classical_full: return "classical-full";
  }
  return "unknown";
}

std::string_view to_string(Method m) { return m == Method::phase_slope ? "phase-slope" : "multi-run-fit"; }

Theory parse_theory(std::string_view name) {
  for (Theory t : {Theory::dirac, Theory::pauli_rel, Theory::pauli_nonrel, Theory::classical_full})
    if (name == to_string(t)) return t;
  throw ConfigError("theory must be one of dirac, pauli-rel, pauli-nonrel, classical-full (got \"" +
                    std::string(name) + "\")");
}

// ---------------------------------------------------------------------------
// Frequency extraction

namespace {

struct LineFit {
  double intercept, slope, rms, slope_error;
};

// Ordinary least squares y = a + b (x - x0), x0 chosen by the caller.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rss += r * r;
  }
  f.rms = std::sqrt(rss / n);
  f.slope_error = x.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return f;
}

}  // namespace

PrecessionResult extract_frequency_phase_slope(std::span<const SpinSample> series, double t1, double t2,
                                               double period, Theory theory) {
  if (!(period > 0.0) || !(t2 > t1)) throw FitError(FitError::Kind::bad_input, "phase slope: empty plateau window");
  const auto windows = static_cast<long long>(std::floor((t2 - t1) / period + 1e-9));
  if (windows < 3) throw FitError(FitError::Kind::bad_input, "phase slope: plateau shorter than three laser periods");

  std::vector<double> sum_y(windows, 0.0), sum_z(windows, 0.0), sum_t(windows, 0.0);
  std::vector<int> count(windows, 0);
  for (const auto& s : series) {
    const auto j = static_cast<long long>(std::floor((s.t - t1) / period + 1e-7));
    if (j < 0 || j >= windows) continue;
    sum_y[j] += s.sy;
    sum_z[j] += s.sz;
    sum_t[j] += s.t;
    ++count[j];
  }
  for (long long j = 0; j < windows; ++j)
    if (count[j] < 8) {
      std::ostringstream os;
      os << "phase slope: laser period " << j << " of the plateau holds " << count[j]
         << " samples, at least 8 per cycle are required";
      throw FitError(FitError::Kind::bad_input, os.str());
    }

  std::vector<double> t(windows), phi(windows);
  double amp = 0.0;
  for (long long j = 0; j < windows; ++j) {
    const double y = sum_y[j] / count[j], z = sum_z[j] / count[j];
    t[j] = sum_t[j] / count[j] - t1;
    phi[j] = std::atan2(y, z);
    if (j > 0) {
      double d = phi[j] - phi[j - 1];
      d -= two_pi * std::round(d / two_pi);
      phi[j] = phi[j - 1] + d;
    }
    amp += std::hypot(y, z);
  }
  const LineFit f = fit_line(t, phi);
  PrecessionResult r;
  r.signed_omega = f.slope;
  r.omega = std::abs(f.slope);
  r.omega_uncertainty = f.slope_error;
  r.phase = f.intercept;
  r.fit_residual = f.rms;
  r.amplitude = natural_units.action * amp / static_cast<double>(windows);
  r.accumulated_phase = r.omega * (t.back() - t.front());
  r.points = static_cast<std::size_t>(windows);
  r.method = Method::phase_slope;
  r.theory = theory;
  if (r.accumulated_phase < 0.1) {
    std::ostringstream os;
    os << "insufficient signal: accumulated phase " << r.accumulated_phase
       << " rad < 0.1 rad over the plateau; a longer run is needed";
    throw FitError(FitError::Kind::insufficient_signal, os.str());
  }
  return r;
}

namespace {

struct CosineModel {
  // s_z = cos(w u + phi) / 2 with u = (T - centre) / scale
  double centre, scale;
  std::vector<double> u, y;

  double rss(double w, double phi) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = y[i] - 0.5 * std::cos(w * u[i] + phi);
      acc += r * r;
    }
    return acc;
  }

  // Coarse best phase for fixed w; Levenberg-Marquardt refines it.
  double best_phase(double w) const {
    double best = 0.0, best_rss = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 72; ++i) {
      const double phi = two_pi * i / 72.0;
      const double v = rss(w, phi);
      if (v < best_rss) {
        best_rss = v;
        best = phi;
      }
    }
    return best;
  }
};

}  // namespace

PrecessionResult extract_frequency_multirun(std::span<const TimedValue> runs, double omega_seed, Theory theory) {
  std::vector<double> Ts;
  for (const auto& r : runs) Ts.push_back(r.T);
  std::sort(Ts.begin(), Ts.end());
  const auto distinct = std::unique(Ts.begin(), Ts.end()) - Ts.begin();
  if (distinct < 12) throw FitError(FitError::Kind::bad_input, "multi-run fit: at least 12 distinct T values required");

  CosineModel m;
  m.centre = 0.5 * (Ts.front() + Ts[distinct - 1]);
  m.scale = 0.5 * (Ts[distinct - 1] - Ts.front());
  for (const auto& r : runs) {
    m.u.push_back((r.T - m.centre) / m.scale);
    m.y.push_back(r.sz);
  }

  double w, phi;
  if (omega_seed > 0.0) {
    w = omega_seed * m.scale;
    phi = m.best_phase(w);
  } else {
    // Frequency scan up to the sampling limit of the T grid.
    const double w_max = 0.5 * pi * static_cast<double>(distinct - 1);
    double best_rss = std::numeric_limits<double>::infinity();
    w = phi = 0.0;
    for (int i = 1; i <= 2000; ++i) {
      const double wi = w_max * i / 2000.0;
      const double pi_ = m.best_phase(wi);
      const double v = m.rss(wi, pi_);
      if (v < best_rss) {
        best_rss = v;
        w = wi;
        phi = pi_;
      }
    }
  }

  // Levenberg-Marquardt on (w, phi).
  double lambda = 1e-3;
  double current = m.rss(w, phi);
  std::ostringstream trace;
  bool converged = false;
  std::array<double, 3> jtj{};  // (ww, wp, pp) at the solution
  for (int it = 0; it < 500; ++it) {
    double a = 0.0, b = 0.0, c = 0.0, gw = 0.0, gp = 0.0;
    for (std::size_t i = 0; i < m.u.size(); ++i) {
      const double arg = w * m.u[i] + phi;
      const double r = m.y[i] - 0.5 * std::cos(arg);
      const double dphi = -0.5 * std::sin(arg);
      const double dw = dphi * m.u[i];
      a += dw * dw;
      b += dw * dphi;
      c += dphi * dphi;
      gw += dw * r;
      gp += dphi * r;
    }
    jtj = {a, b, c};
    if (it < 20 || it % 50 == 0) trace << " it" << it << ":rss=" << current;
    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      const double aa = a * (1.0 + lambda), cc = c * (1.0 + lambda);
      const double det = aa * cc - b * b;
      if (!(std::abs(det) > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double dw = (cc * gw - b * gp) / det;
      const double dp = (aa * gp - b * gw) / det;
      const double trial = m.rss(w + dw, phi + dp);
      if (trial <= current) {
        const double change = std::abs(dw) / std::max(std::abs(w), 1e-300) + std::abs(dp);
        w += dw;
        phi += dp;
        const double previous = current;
        current = trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        stepped = true;
        if (change < 1e-14 || previous - current <= 1e-30 + 1e-15 * previous) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) converged = current < 1e-20 || lambda > 1e20;
    if (converged) break;
  }
  const auto n = static_cast<double>(m.u.size());
  if (!converged || !std::isfinite(current)) {
    throw FitError(FitError::Kind::not_converged, "multi-run fit did not converge; residual trace:" + trace.str());
  }

  PrecessionResult r;
  r.method = Method::multi_run_fit;
  r.theory = theory;
  r.signed_omega = w / m.scale;
  r.omega = std::abs(r.signed_omega);
  r.fit_residual = std::sqrt(current / n);
  const double det = jtj[0] * jtj[2] - jtj[1] * jtj[1];
  const double sigma2 = n > 2.0 ? current / (n - 2.0) : 0.0;
  r.omega_uncertainty = det > 0.0 ? std::sqrt(sigma2 * jtj[2] / det) / m.scale : 0.0;
  // phase of cos at the first T, reported in (-pi, pi]
  const double phase0 = std::remainder(w * (-1.0) + phi, two_pi);
  r.phase = w >= 0.0 ? phase0 : -phase0;
  r.amplitude = 0.5 * natural_units.action;
  r.accumulated_phase = 2.0 * std::abs(w);
  r.points = m.u.size();
  if (r.accumulated_phase < pi) {
    std::ostringstream os;
    os << "multi-run fit: T values span " << r.accumulated_phase
       << " rad of precession, at least half a period (pi) is required";
    throw FitError(FitError::Kind::insufficient_signal, os.str());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Closed forms

double omega_dirac_formula(const LaserConfig& cfg, const PhysConstants& k) {
  const double qE = k.elementary_charge * cfg.peak_field;
  const double lam = cfg.wavelength;
  const double hb = k.hbar, m = k.electron_mass, c = k.speed_of_light;
  return std::pow(qE, 4) * std::pow(lam, 5) / (std::pow(two_pi, 5) * hb * hb * m * m * std::pow(c, 5));
}

double omega_pauli_formula(const LaserConfig& cfg, const PhysConstants& k) {
  const double qE = k.elementary_charge * cfg.peak_field;
  const double m = k.electron_mass, c = k.speed_of_light;
  return qE * qE * cfg.wavelength / (two_pi * m * m * c * c * c);
}

ValidityReport perturbative_validity(const LaserConfig& cfg, const PhysConstants& k) {
  const double qE = k.elementary_charge * cfg.peak_field;
  const double kw = cfg.wave_number();
  ValidityReport r;
  r.recoil_ratio = qE / (kw * kw * k.hbar * k.speed_of_light);
  r.energy_ratio = qE / (2.0 * kw * k.electron_mass * k.speed_of_light * k.speed_of_light);
  r.recoil_bound = r.recoil_ratio < 1.0;
  r.energy_bound = r.energy_ratio < 1.0;
  return r;
}

double intensity_w_per_cm2(double field, const PhysConstants& k) {
  return k.vacuum_permittivity * k.speed_of_light * field * field * 1e-4;
}

namespace {

// E_min^4 = A / (n lambda^6), E_max = B / lambda^2
double bound_A(const PhysConstants& k) {
  const double c = k.speed_of_light, hb = k.hbar, m = k.electron_mass, q = k.elementary_charge;
  return std::pow(two_pi, 6) * std::pow(c, 6) * hb * hb * m * m / (2.0 * std::pow(q, 4));
}

double bound_B(const PhysConstants& k) { return two_pi * two_pi * k.speed_of_light * k.hbar / k.elementary_charge; }

}  // namespace

Bounds experimental_bounds(double wavelength, double n_cycles, const PhysConstants& k) {
  if (!(wavelength > 0.0)) throw ConfigError("wavelength_m must be positive");
  if (!(n_cycles >= 1.0)) throw ConfigError("n_cycles must be at least 1");
  Bounds b;
  b.e_min = std::pow(bound_A(k) / (n_cycles * std::pow(wavelength, 6)), 0.25);
  b.e_max = bound_B(k) / (wavelength * wavelength);
  b.feasible = b.e_min < b.e_max;
  b.intensity_min = intensity_w_per_cm2(b.e_min, k);
  b.intensity_max = intensity_w_per_cm2(b.e_max, k);
  return b;
}

CoincidencePoint coincidence_point(double n_cycles, const PhysConstants& k) {
  if (!(n_cycles >= 1.0)) throw ConfigError("n_cycles must be at least 1");
  const double B = bound_B(k);
  const double lam = B * B * std::sqrt(n_cycles / bound_A(k));
  const double e = B / (lam * lam);
  return {lam, e, intensity_w_per_cm2(e, k)};
}

// ---------------------------------------------------------------------------
// Simulation driver

pauli::Toggles default_terms(Theory t) {
  return t == Theory::pauli_rel ? pauli::Toggles::relativistic() : pauli::Toggles::nonrelativistic();
}

double predicted_omega(Theory t, const LaserConfig& cfg) {
  const double s = std::sin(cfg.ellipticity);
  switch (t) {
    case Theory::dirac:
    case Theory::pauli_rel: return omega_dirac_formula(cfg) * s;
    case Theory::pauli_nonrel:
    case Theory::classical_full: return omega_pauli_formula(cfg) * s;
  }
  return 0.0;
}

RunSpec plan(const RunSpec& spec) {
  RunSpec out = spec;
  if (spec.target_phase > 0.0) {
    const double omega = predicted_omega(spec.theory, spec.laser);
    if (omega > 0.0) {
      const double plateau = spec.target_phase / (omega * spec.laser.period());
      double total = std::ceil(2.0 * spec.laser.ramp_cycles + 2.0 * spec.analysis_margin_cycles + plateau);
      total = std::clamp(total, spec.min_cycles, spec.max_cycles);
      out.laser.total_cycles = std::max(total, 2.0 * spec.laser.ramp_cycles + 2.0 * spec.analysis_margin_cycles + 3.0);
    }
  }
  return out;
}

namespace {

struct Collected {
  RunStats stats;
  std::vector<Sample> series;
};

Collected run_dirac(const RunSpec& spec, int n_max) {
  dirac::Propagator prop(spec.laser, dirac::basis_for(spec.laser, n_max), spec.propagation);
  const dirac::SpinOperator sy = dirac::spin_operator(1, prop.bispinors());
  const double ts = natural_units.time;
  Collected c;
  c.stats = prop.run(dirac::rest_spin_up(prop.basis()), [&](const dirac::DiracState& s) {
    c.series.push_back({s.time * ts, sy.expectation(s), dirac::spin_z(s), dirac::norm(s),
                        dirac::negative_energy_population(s)});
  });
  return c;
}

Collected run_pauli(const RunSpec& spec, int n_max) {
  const pauli::Toggles terms = spec.pauli_terms.value_or(default_terms(spec.theory));
  pauli::Propagator prop(spec.laser, n_max, terms, spec.propagation);
  const double ts = natural_units.time;
  Collected c;
  c.stats = prop.run(pauli::rest_spin_up(n_max), [&](const pauli::PauliState& s) {
    c.series.push_back({s.time * ts, pauli::spin(s, 1), pauli::spin(s, 2), pauli::norm(s),
                        std::numeric_limits<double>::quiet_NaN()});
  });
  return c;
}

Collected run_classical(const RunSpec& spec) {
  classical::IntegrationOptions o;
  o.rel_tol = spec.propagation.rel_tol;
  o.samples_per_cycle = spec.propagation.samples_per_cycle;
  o.max_step_cycles = spec.propagation.max_step_cycles;
  const double ts = natural_units.time;
  Collected c;
  const auto st = classical::propagate_full_classical(classical::rest_initial_state(), spec.laser, o,
                                                      [&](const classical::ClassicalState& s) {
                                                        c.series.push_back({s.time * ts, s.spin.y, s.spin.z,
                                                                            2.0 * norm(s.spin),
                                                                            std::numeric_limits<double>::quiet_NaN()});
                                                      });
  c.stats.steps = st.steps;
  c.stats.rejected = st.rejected;
  c.stats.max_norm_drift = st.max_spin_drift;
  return c;
}

}  // namespace

RunResult simulate(const RunSpec& requested) {
  RunResult result;
  RunSpec spec = plan(requested);
  spec.laser.validate();
  spec.propagation.validate();
  if (spec.n_max < 1) throw ConfigError("n_max must be at least 1");
  const auto start = std::chrono::steady_clock::now();

  Collected c;
  if (spec.theory == Theory::classical_full) {
    c = run_classical(spec);
  } else {
    for (;;) {
      c = spec.theory == Theory::dirac ? run_dirac(spec, spec.n_max) : run_pauli(spec, spec.n_max);
      if (c.stats.max_edge_population <= spec.edge_threshold || 2 * spec.n_max > spec.n_max_limit) break;
      spec.n_max *= 2;
    }
  }
  result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.stats = c.stats;
  result.series = std::move(c.series);
  result.spec = spec;

  const double period = spec.laser.period();
  const double edge = (spec.laser.ramp_cycles + spec.analysis_margin_cycles) * period;
  const double total = spec.laser.total_cycles * period;
  std::vector<SpinSample> spin;
  spin.reserve(result.series.size());
  for (const auto& s : result.series) spin.push_back({s.t, s.sy, s.sz});
  try {
    result.precession = extract_frequency_phase_slope(spin, edge, total - edge, period, spec.theory);
  } catch (const FitError& e) {
    result.extraction_error = e.what();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

ScalingFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 5) throw FitError(FitError::Kind::bad_input, "power-law fit needs at least 5 field points");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::vector<double> x, y;
  for (const auto& [e, w] : points) {
    if (!(e > 0.0) || !(w > 0.0)) throw FitError(FitError::Kind::bad_input, "power-law fit needs positive values");
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    x.push_back(std::log(e));
    y.push_back(std::log(w));
  }
  if (hi < 3.0 * lo * (1.0 - 1e-12))
    throw FitError(FitError::Kind::bad_input, "power-law fit needs field points spanning a factor of 3");
  const LineFit f = fit_line(x, y);
  double my = 0.0;
  for (double v : y) my += v;
  my /= static_cast<double>(y.size());
  double tot = 0.0;
  for (double v : y) tot += (v - my) * (v - my);
  ScalingFit s;
  s.exponent = f.slope;
  s.exponent_uncertainty = f.slope_error;
  s.prefactor = std::exp(f.intercept);
  const double rss = f.rms * f.rms * static_cast<double>(y.size());
  s.r_squared = tot > 0.0 ? 1.0 - rss / tot : 1.0;
  s.field_points.assign(points.begin(), points.end());
  return s;
}

bool SweepOutcome::complete() const {
  return std::all_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.ok(); });
}

unsigned worker_count() {
  if (const char* env = std::getenv("SPINPREC_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    throw ConfigError("SPINPREC_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <class Apply>
SweepOutcome run_sweep(const RunSpec& spec, std::span<const double> values, Apply apply) {
  if (values.empty()) throw ConfigError("sweep value list is empty");
  SweepOutcome out;
  out.points.resize(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepPoint& pt = out.points[i];
      pt.value = values[i];
      try {
        RunSpec s = spec;
        apply(s, values[i]);
        pt.run = simulate(s);
        if (!pt.run->precession) pt.error = pt.run->extraction_error;
      } catch (const std::exception& e) {
        pt.error = e.what();
      }
    }
  };
  const unsigned n = std::min<unsigned>(worker_count(), static_cast<unsigned>(values.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace

SweepOutcome field_sweep(const RunSpec& spec, std::span<const double> fields) {
  for (double e : fields) {
    LaserConfig c = spec.laser;
    c.peak_field = e;
    c.validate();
    const ValidityReport v = perturbative_validity(c);
    if (!v.ok()) {
      std::ostringstream os;
      os << "field " << e << " V/m violates the perturbative bounds (ratios " << v.recoil_ratio << ", "
         << v.energy_ratio << ")";
      throw ConfigError(os.str());
    }
  }
  return run_sweep(spec, fields, [](RunSpec& s, double e) { s.laser.peak_field = e; });
}

SweepOutcome ellipticity_sweep(const RunSpec& spec, std::span<const double> etas) {
  bool has_circular = false;
  for (double eta : etas) {
    if (!(eta >= 0.0 && eta <= pi / 2.0)) throw ConfigError("ellipticity values must lie in [0, pi/2]");
    has_circular = has_circular || std::abs(eta - pi / 2.0) < 1e-12;
  }
  if (!etas.empty() && !has_circular) throw ConfigError("ellipticity sweep must include pi/2 for normalization");
  return run_sweep(spec, etas, [](RunSpec& s, double eta) { s.laser.ellipticity = eta; });
}

ScalingFit scaling_of(const SweepOutcome& sweep) {
  if (!sweep.complete()) throw FitError(FitError::Kind::bad_input, "field sweep has failed points");
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : sweep.points) pts.emplace_back(p.value, p.run->precession->omega);
  return fit_power_law(pts);
}

std::vector<EllipticityPoint> ellipticity_curve(const SweepOutcome& sweep) {
  if (!sweep.complete()) throw FitError(FitError::Kind::bad_input, "ellipticity sweep has failed points");
  double circular = 0.0;
  for (const auto& p : sweep.points)
    if (std::abs(p.value - pi / 2.0) < 1e-12) circular = p.run->precession->omega;
  if (!(circular > 0.0)) throw FitError(FitError::Kind::bad_input, "no circular-polarization reference point");
  std::vector<EllipticityPoint> out;
  for (const auto& p : sweep.points)
    out.push_back({p.value, p.run->precession->omega / circular, p.run->precession->fit_residual});
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw ConfigError("log_spaced: need 0 < lo <= hi and count >= 1");
  std::vector<double> v;
  for (int i = 0; i < count; ++i)
    v.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return v;
}

}  // namespace spinprec::analysis
