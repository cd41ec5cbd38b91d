#include "spinprec/propagation.hpp"

#include "spinprec/error.hpp"

namespace spinprec {

void PropagationOptions::validate() const {
  if (!(rel_tol >= 1e-13 && rel_tol <= 1e-6)) throw ConfigError("rel_tolerance must lie in [1e-13, 1e-6]");
  if (samples_per_cycle < 1) throw ConfigError("samples_per_cycle must be positive");
  if (steps_per_cycle < 1 || steps_per_cycle % samples_per_cycle != 0)
    throw ConfigError("steps_per_cycle must be a positive multiple of samples_per_cycle");
  if (!(max_step_cycles > 0.0)) throw ConfigError("max_step_cycles must be positive");
}

}  // namespace spinprec
