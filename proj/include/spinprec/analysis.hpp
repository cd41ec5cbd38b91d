#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinprec/classical.hpp"
#include "spinprec/constants.hpp"
#include "spinprec/laser.hpp"
#include "spinprec/pauli.hpp"
#include "spinprec/propagation.hpp"

namespace spinprec::analysis {

enum class Theory { dirac, pauli_rel, pauli_nonrel, classical_full };
enum class Method { phase_slope, multi_run_fit };

std::string_view to_string(Theory t);
std::string_view to_string(Method m);
/// Accepts "dirac", "pauli-rel", "pauli-nonrel", "classical-full"; throws ConfigError.
Theory parse_theory(std::string_view name);

struct PrecessionResult {
  double omega = 0.0;              ///< rad/s, >= 0
  double omega_uncertainty = 0.0;  ///< rad/s, least-squares standard error
  double amplitude = 0.0;          ///< J s
  double phase = 0.0;              ///< rad, fitted phase at the start of the window
  double fit_residual = 0.0;       ///< RMS residual (rad for phase slope, units of hbar for the cosine fit)
  double accumulated_phase = 0.0;  ///< rad, |omega| times the fitted span
  double signed_omega = 0.0;       ///< rad/s, slope before taking the magnitude
  std::size_t points = 0;
  Method method = Method::phase_slope;
  Theory theory = Theory::dirac;
};

/// One snapshot of a spin time series. Spin components in units of hbar.
struct SpinSample {
  double t;  ///< s
  double sy;
  double sz;
};

/// Cycle-averages (s_y, s_z) over consecutive periods inside [t1, t2], unwraps
/// atan2(<s_y>, <s_z>) and fits a straight line. Throws FitError.
PrecessionResult extract_frequency_phase_slope(std::span<const SpinSample> series, double t1, double t2,
                                               double period, Theory theory = Theory::dirac);

struct TimedValue {
  double T;   ///< s
  double sz;  ///< units of hbar
};

/// Fits s_z(T) = cos(Omega (T - T0)) / 2 by Levenberg-Marquardt.
/// `omega_seed` <= 0 selects a seed from a frequency scan. Throws FitError.
PrecessionResult extract_frequency_multirun(std::span<const TimedValue> runs, double omega_seed = 0.0,
                                            Theory theory = Theory::dirac);

/// Closed-form Dirac precession frequency for circular light, rad/s.
double omega_dirac_formula(const LaserConfig& cfg, const PhysConstants& k = codata2018);
/// Closed-form Pauli frequency averaged over a wavelength, rad/s.
double omega_pauli_formula(const LaserConfig& cfg, const PhysConstants& k = codata2018);

struct ValidityReport {
  bool recoil_bound = true;  ///< |q| E < k^2 hbar c
  bool energy_bound = true;  ///< |q| E < 2 k m c^2
  double recoil_ratio = 0.0;
  double energy_ratio = 0.0;
  bool ok() const { return recoil_bound && energy_bound; }
};

ValidityReport perturbative_validity(const LaserConfig& cfg, const PhysConstants& k = codata2018);

struct Bounds {
  double e_min = 0.0;  ///< V/m
  double e_max = 0.0;  ///< V/m
  bool feasible = false;
  double intensity_min = 0.0;  ///< W/cm^2 at e_min
  double intensity_max = 0.0;  ///< W/cm^2 at e_max
};

/// Field window for an observable precession within n laser cycles.
Bounds experimental_bounds(double wavelength, double n_cycles, const PhysConstants& k = codata2018);
/// Intensity in W/cm^2 for peak field E (V/m).
double intensity_w_per_cm2(double field, const PhysConstants& k = codata2018);

struct CoincidencePoint {
  double wavelength;  ///< m
  double field;       ///< V/m
  double intensity;   ///< W/cm^2
};

/// Wavelength at which both bounds coincide for n cycles.
CoincidencePoint coincidence_point(double n_cycles, const PhysConstants& k = codata2018);

// ---------------------------------------------------------------------------
// Simulation driver shared by sweeps and the command-line tool.

struct RunSpec {
  Theory theory = Theory::dirac;
  LaserConfig laser;
  int n_max = 8;
  PropagationOptions propagation;
  /// Overrides the theory's default Pauli terms when set.
  std::optional<pauli::Toggles> pauli_terms;
  /// Escalate n_max (doubling) while the outermost modes carry more than this.
  double edge_threshold = 1e-10;
  int n_max_limit = 64;
  /// If positive, total_cycles is replaced by 2 ramp + cycles needed to reach
  /// this predicted plateau phase (clamped to [min_cycles, max_cycles]).
  double target_phase = 0.0;
  double min_cycles = 200.0;
  double max_cycles = 2e5;
  double analysis_margin_cycles = 0.0;  ///< extra periods trimmed from each plateau edge
};

struct Sample {
  double t;  ///< s
  double sy;
  double sz;
  double norm;
  double neg_energy_pop;  ///< NaN for theories without negative-energy states
};

struct RunResult {
  RunSpec spec;  ///< as executed (total_cycles and n_max resolved)
  std::vector<Sample> series;
  RunStats stats;
  std::optional<PrecessionResult> precession;
  std::string extraction_error;  ///< set when precession is empty
  double elapsed_seconds = 0.0;
};

/// Theory-appropriate Pauli terms.
pauli::Toggles default_terms(Theory t);
/// Predicted frequency (rad/s) used for run-length planning.
double predicted_omega(Theory t, const LaserConfig& cfg);
/// Resolves target_phase into total_cycles.
RunSpec plan(const RunSpec& spec);

/// Runs the designated solver and extracts the precession on the plateau.
/// Solver failures throw; extraction failures are reported in the result.
RunResult simulate(const RunSpec& spec);

struct ScalingFit {
  double exponent = 0.0;
  double exponent_uncertainty = 0.0;
  double prefactor = 0.0;  ///< (rad/s) (V/m)^-exponent
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> field_points;  ///< (E, Omega)
};

/// Least-squares fit of log Omega = a + b log E. Requires >= 5 points spanning
/// at least a factor of 3 in E; throws FitError otherwise.
ScalingFit fit_power_law(std::span<const std::pair<double, double>> points);

struct SweepPoint {
  double value;  ///< field (V/m) or ellipticity (rad)
  std::optional<RunResult> run;
  std::string error;  ///< empty on success
  bool ok() const { return error.empty(); }
};

struct SweepOutcome {
  std::vector<SweepPoint> points;
  bool complete() const;
};

/// Worker count from SPINPREC_WORKERS (default: hardware concurrency).
unsigned worker_count();

/// Field sweep. Every value must satisfy perturbative_validity (ConfigError otherwise).
SweepOutcome field_sweep(const RunSpec& spec, std::span<const double> fields);
/// Ellipticity sweep; values in [0, pi/2] and must include pi/2.
SweepOutcome ellipticity_sweep(const RunSpec& spec, std::span<const double> etas);

/// Fit over a complete field sweep.
ScalingFit scaling_of(const SweepOutcome& sweep);

struct EllipticityPoint {
  double eta;
  double ratio;  ///< Omega(eta) / Omega(pi/2)
  double residual;
};
/// Normalized ellipticity curve over a complete sweep.
std::vector<EllipticityPoint> ellipticity_curve(const SweepOutcome& sweep);

/// Sweep grid: `count` log-spaced fields in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace spinprec::analysis
