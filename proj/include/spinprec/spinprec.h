/* C interface to the spin-precession library.
 *
 * Every function returning spinprec_status leaves a thread-local message for
 * spinprec_last_error() on failure. Handles are opaque and owned by the caller;
 * release them with the matching *_free function. Strings returned through
 * `char**` are released with spinprec_string_free. */
#ifndef SPINPREC_H
#define SPINPREC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define SPINPREC_API __attribute__((visibility("default")))
#else
#define SPINPREC_API
#endif

typedef enum spinprec_status {
  SPINPREC_OK = 0,
  SPINPREC_E_USAGE = 1,
  SPINPREC_E_CONFIG = 2,
  SPINPREC_E_SOLVER = 3,
  SPINPREC_E_FIT = 4,
  SPINPREC_E_DOMAIN = 5,
  SPINPREC_E_IO = 6,
  SPINPREC_E_INTERNAL = 7
} spinprec_status;

typedef enum spinprec_axis { SPINPREC_AXIS_FIELD = 0, SPINPREC_AXIS_ELLIPTICITY = 1 } spinprec_axis;

typedef struct spinprec_config spinprec_config;
typedef struct spinprec_run spinprec_run;
typedef struct spinprec_sweep spinprec_sweep;

typedef struct spinprec_precession {
  double omega;             /* rad/s */
  double omega_uncertainty; /* rad/s */
  double signed_omega;      /* rad/s */
  double fit_residual;
  double accumulated_phase; /* rad */
  size_t points;
} spinprec_precession;

typedef struct spinprec_sample {
  double t_s;
  double sy_over_hbar;
  double sz_over_hbar;
  double norm;
  double neg_energy_pop; /* NaN when not applicable */
} spinprec_sample;

typedef struct spinprec_run_stats {
  double total_cycles; /* as executed */
  int n_max;           /* as executed */
  double max_norm_drift;
  double final_negative_population;
  double max_edge_population;
  double elapsed_seconds;
} spinprec_run_stats;

typedef struct spinprec_sweep_point {
  double value;
  spinprec_status status; /* OK, SOLVER (run failed) or FIT (no extractable precession) */
  double omega;           /* rad/s, NaN unless status is OK */
  double fit_residual;
} spinprec_sweep_point;

typedef struct spinprec_scaling {
  double exponent;
  double exponent_uncertainty;
  double prefactor;
  double r_squared;
} spinprec_scaling;

typedef struct spinprec_bounds {
  double e_min;
  double e_max;
  int feasible;
  double intensity_min;
  double intensity_max;
} spinprec_bounds;

SPINPREC_API const char* spinprec_version(void);
SPINPREC_API const char* spinprec_last_error(void);
SPINPREC_API void spinprec_string_free(char* s);

SPINPREC_API spinprec_status spinprec_config_parse(const char* json_text, spinprec_config** out);
SPINPREC_API spinprec_status spinprec_config_load(const char* path, spinprec_config** out);
SPINPREC_API spinprec_status spinprec_config_to_json(const spinprec_config* cfg, char** out);
/* Validation report (perturbative window, closed-form frequencies, planned length). */
SPINPREC_API spinprec_status spinprec_config_report(const spinprec_config* cfg, char** out);
SPINPREC_API void spinprec_config_free(spinprec_config* cfg);

/* Runs the configured solver. An extraction failure is not an error here:
 * the run succeeds and spinprec_run_precession reports SPINPREC_E_FIT. */
SPINPREC_API spinprec_status spinprec_simulate(const spinprec_config* cfg, spinprec_run** out);
SPINPREC_API spinprec_status spinprec_run_precession(const spinprec_run* run, spinprec_precession* out);
SPINPREC_API spinprec_status spinprec_run_stats_get(const spinprec_run* run, spinprec_run_stats* out);
SPINPREC_API size_t spinprec_run_sample_count(const spinprec_run* run);
SPINPREC_API spinprec_status spinprec_run_sample(const spinprec_run* run, size_t index, spinprec_sample* out);
SPINPREC_API spinprec_status spinprec_run_csv(const spinprec_run* run, char** out);
SPINPREC_API spinprec_status spinprec_run_json(const spinprec_run* run, char** out);
/* Either path may be NULL to skip that file. */
SPINPREC_API spinprec_status spinprec_run_write(const spinprec_run* run, const char* csv_path, const char* json_path);
SPINPREC_API void spinprec_run_free(spinprec_run* run);

/* Runs every point even if some fail; check spinprec_sweep_complete. */
SPINPREC_API spinprec_status spinprec_sweep_run(const spinprec_config* cfg, spinprec_axis axis, const double* values,
                                                size_t count, spinprec_sweep** out);
SPINPREC_API int spinprec_sweep_complete(const spinprec_sweep* sweep);
SPINPREC_API size_t spinprec_sweep_point_count(const spinprec_sweep* sweep);
SPINPREC_API spinprec_status spinprec_sweep_point_get(const spinprec_sweep* sweep, size_t index,
                                                      spinprec_sweep_point* out);
/* Power-law fit of a complete field sweep. */
SPINPREC_API spinprec_status spinprec_sweep_scaling(const spinprec_sweep* sweep, spinprec_scaling* out);
SPINPREC_API spinprec_status spinprec_sweep_write(const spinprec_sweep* sweep, const char* csv_path,
                                                  const char* json_path);
SPINPREC_API void spinprec_sweep_free(spinprec_sweep* sweep);

SPINPREC_API spinprec_status spinprec_bounds_get(double wavelength_m, double n_cycles, spinprec_bounds* out);
SPINPREC_API spinprec_status spinprec_bounds_json(double wavelength_m, double n_cycles, char** out);

/* Closed-form precession frequencies in rad/s, scaled by sin(ellipticity). */
SPINPREC_API spinprec_status spinprec_omega_dirac(double wavelength_m, double field_V_per_m, double ellipticity_rad,
                                                  double* out);
SPINPREC_API spinprec_status spinprec_omega_pauli(double wavelength_m, double field_V_per_m, double ellipticity_rad,
                                                  double* out);

#ifdef __cplusplus
}
#endif

#endif
