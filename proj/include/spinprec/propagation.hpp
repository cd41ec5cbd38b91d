#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "spinprec/magnus.hpp"

namespace spinprec {

enum class Integrator {
  magnus,  ///< fixed-step fourth-order commutator-free Magnus, Chebyshev exponentials
  dop853,  ///< adaptive explicit Runge-Kutta 8(5,3) in the interaction picture (Dirac only)
};

struct PropagationOptions {
  Integrator integrator = Integrator::magnus;
  double rel_tol = 1e-10;
  int samples_per_cycle = 8;
  int steps_per_cycle = 128;            ///< magnus; must be a multiple of samples_per_cycle
  double max_step_cycles = 1.0 / 50.0;  ///< dop853 step cap as a fraction of the laser period

  /// Throws ConfigError for out-of-range settings.
  void validate() const;
};

struct RunStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;  ///< right-hand sides or matrix-vector products
  double max_norm_drift = 0.0;
  double final_negative_population = 0.0;
  double max_edge_population = 0.0;  ///< largest population seen in the outermost modes
};

/// Drives a Cfme4 stepper from t to t_end, calling `emit()` after every
/// snapshot interval of length `stride` (and at t_end). Each interval is cut
/// into uniform substeps no longer than stride / substeps. Returns step count.
template <class Coeffs, class Emit>
std::size_t run_snapshots(magnus::Cfme4& stepper, std::span<magnus::cplx> psi, double& t, double t_end,
                          double stride, int substeps, Coeffs&& coeffs, Emit&& emit) {
  std::size_t steps = 0;
  auto next_index = static_cast<long long>(std::floor(t / stride + 1e-9)) + 1;
  while (t < t_end) {
    double target = static_cast<double>(next_index) * stride;
    if (target > t_end || t_end - target < 1e-9 * stride) target = t_end;
    const double span = target - t;
    const int n = std::max(1, static_cast<int>(std::ceil(span / (stride / substeps) - 1e-9)));
    const double h = span / n;
    for (int i = 0; i < n; ++i) stepper.step(psi, t + i * h, h, coeffs);
    steps += static_cast<std::size_t>(n);
    t = target;
    ++next_index;
    emit();
  }
  return steps;
}

}  // namespace spinprec
