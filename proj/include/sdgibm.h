/* C interface to the staggered-DG immersed boundary solver.
 *
 * All entry points are thread-compatible: distinct handles may be used from
 * distinct threads. Functions returning sdgibm_status set a thread-local
 * message retrievable with sdgibm_last_error().
 */
#ifndef SDGIBM_H
#define SDGIBM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sdgibm_status {
  SDGIBM_OK = 0,
  SDGIBM_ERR_INVALID_PARAMETER,
  SDGIBM_ERR_POINT_OUTSIDE_DOMAIN,
  SDGIBM_ERR_UNSUPPORTED_DEGREE,
  SDGIBM_ERR_INVALID_EVALUATION,
  SDGIBM_ERR_INVALID_GEOMETRY,
  SDGIBM_ERR_MARKER_ESCAPED,
  SDGIBM_ERR_SINGULAR_SYSTEM,
  SDGIBM_ERR_SOLVE_DIVERGED,
  SDGIBM_ERR_ASSEMBLY_FAILURE,
  SDGIBM_ERR_POSTPROCESS_FAILURE,
  SDGIBM_ERR_BAD_CONFIG,
  SDGIBM_ERR_IO,
  SDGIBM_ERR_INTERNAL
} sdgibm_status;

typedef struct sdgibm_config sdgibm_config;
typedef struct sdgibm_run sdgibm_run;
typedef struct sdgibm_sweep sdgibm_sweep;

/* One diagnostics row; row 0 describes the initial state. */
typedef struct sdgibm_step_stats {
  int step;
  double t;
  double area;            /* signed shoelace area of the marker polygon */
  double area_change_pct; /* relative to the step-0 area (magnitudes) */
  double energy;
  double eta; /* CFL parameter of the step */
  int picard_iters;
  int blown_up;
} sdgibm_step_stats;

typedef struct sdgibm_run_summary {
  double area0, area_final, area_change_pct;
  double energy0, energy_final, energy_max, eta_max;
  double max_energy_identity_rel; /* worst energy-identity mismatch over all iterates */
  double max_div_residual_rel;    /* worst ||C u|| (rhs-scaled) over all iterates */
  double max_force_imbalance;     /* worst scaled magnitude of the summed elastic forces */
  int total_picard_iters;
  int picard_warning_steps;
  int steps_completed;
} sdgibm_run_summary;

const char* sdgibm_version(void);
const char* sdgibm_status_name(sdgibm_status status);
/* Message of the last failing call on this thread ("" if none). */
const char* sdgibm_last_error(void);

/* Configuration: string-keyed parameters matching the run.meta schema
 * (experiment, N, m, K, T, dt, rho, mu, kappa, radius, picard_tol,
 * picard_max_iters, snapshot_stride, max_energy_factor, outdir). */
sdgibm_config* sdgibm_config_create(void);
void sdgibm_config_destroy(sdgibm_config* config);
sdgibm_status sdgibm_config_set(sdgibm_config* config, const char* key, const char* value);
sdgibm_status sdgibm_config_get(const sdgibm_config* config, const char* key, char* buffer,
                                size_t size);
/* Plain "key = value" lines; '#' starts a comment. */
sdgibm_status sdgibm_config_load_file(sdgibm_config* config, const char* path);

/* Runs one experiment. When the config carries an outdir, area_history.csv,
 * markers_<step>.csv and run.meta are written there. */
sdgibm_status sdgibm_run_experiment(const sdgibm_config* config, sdgibm_run** out_run);
void sdgibm_run_destroy(sdgibm_run* run);
int sdgibm_run_step_count(const sdgibm_run* run);
sdgibm_status sdgibm_run_step_stats(const sdgibm_run* run, int row, sdgibm_step_stats* out);
sdgibm_status sdgibm_run_get_summary(const sdgibm_run* run, sdgibm_run_summary* out);
/* "completed", "blown_up", "marker_escaped" or "picard_warnings". */
const char* sdgibm_run_termination(const sdgibm_run* run);
int sdgibm_run_marker_count(const sdgibm_run* run);
/* Final marker positions as x0,y0,x1,y1,...; capacity counts doubles. */
sdgibm_status sdgibm_run_markers(const sdgibm_run* run, double* xy, size_t capacity);
sdgibm_status sdgibm_run_write_outputs(const sdgibm_run* run, const char* outdir);

/* Cartesian sweep over config keys; each axis takes a comma-separated value
 * list. Point outputs land in <outdir>/run_<index>/ plus one summary.csv. */
sdgibm_sweep* sdgibm_sweep_create(const sdgibm_config* base);
void sdgibm_sweep_destroy(sdgibm_sweep* sweep);
sdgibm_status sdgibm_sweep_axis(sdgibm_sweep* sweep, const char* key, const char* values);
int sdgibm_sweep_point_count(const sdgibm_sweep* sweep);
sdgibm_status sdgibm_sweep_execute(sdgibm_sweep* sweep, const char* outdir, int jobs);

/* Structural property battery; prints one line per check to stdout and
 * returns the number of failures. */
int sdgibm_self_check(int verbose);

#ifdef __cplusplus
}
#endif

#endif /* SDGIBM_H */
