#ifndef RDCHECK_H
#define RDCHECK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RdStatus {
  RD_STATUS_OK = 0,
  RD_STATUS_NULL_POINTER = 1,
  RD_STATUS_INVALID_UTF8 = 2,
  RD_STATUS_CONFIG_PARSE = 3,
  RD_STATUS_CONFIG_INVALID = 4,
  RD_STATUS_DOMAIN = 5,
  RD_STATUS_CONTRACT = 6,
  RD_STATUS_NUMERICAL = 7,
  RD_STATUS_DATA = 8,
  RD_STATUS_IO = 9,
  RD_STATUS_OUT_OF_RANGE = 10,
  RD_STATUS_PANIC = 11,
} RdStatus;

typedef enum RdVerdict {
  RD_VERDICT_PASS = 0,
  RD_VERDICT_FAIL = 1,
  RD_VERDICT_ABORTED = 2,
} RdVerdict;

// A completed experiment with its report.
typedef struct RdExperiment RdExperiment;

// A reaction system.
typedef struct RdModel RdModel;

// A configured simulation and, once run, its trajectory.
typedef struct RdSimulation RdSimulation;

// Free-space interpolation constants.
typedef struct RdConstants {
  double b4;
  double b5;
  double b;
} RdConstants;

typedef struct RdExponents {
  double lambda;
  // NaN when not admissible.
  double xi;
  bool admissible;
} RdExponents;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rd_version(void);

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library from the same thread.
const char *rd_last_error_message(void);

// # Safety
// `s` must be NULL or a string returned by this library, released once.
void rd_string_free(char *s);

// # Safety
// `out` must point to writable memory for one `RdConstants`.
enum RdStatus rd_free_space_constants(uint32_t n, double d, double gamma, struct RdConstants *out);

// Writes `u1..u4` to `out`.
//
// # Safety
// `out` must point to writable memory for four doubles.
enum RdStatus rd_quad_equilibrium(double m13, double m23, double m24, double *out);

// # Safety
// `out` must point to writable memory for one `RdExponents`.
enum RdStatus rd_exponent_algebra(double epsilon, double delta, struct RdExponents *out);

// Build a model from the JSON `model` object of a run configuration.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RdStatus rd_model_from_json(const char *json, struct RdModel **out);

// Number of species, or 0 for NULL.
//
// # Safety
// `model` must be NULL or a live handle.
uintptr_t rd_model_n_species(const struct RdModel *model);

// Evaluate `f(u, t)` into `out`; both arrays have `n` entries.
//
// # Safety
// `u` and `out` must each point to `n` doubles.
enum RdStatus rd_model_eval(const struct RdModel *model,
                            const double *u,
                            uintptr_t n,
                            double t,
                            double *out);

// # Safety
// `model` must be NULL or a handle not yet freed.
void rd_model_free(struct RdModel *model);

// Prepare a simulation from a full run configuration (JSON).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RdStatus rd_simulation_from_json(const char *json, struct RdSimulation **out);

// Integrate to the configured end time. On a numerical failure the partial
// trajectory is kept and `RD_STATUS_NUMERICAL` is returned.
//
// # Safety
// `sim` must be a live handle.
enum RdStatus rd_simulation_run(struct RdSimulation *sim);

// # Safety
// `sim` must be NULL or a live handle.
uintptr_t rd_simulation_snapshot_count(const struct RdSimulation *sim);

// # Safety
// `sim` must be NULL or a live handle.
uintptr_t rd_simulation_n_species(const struct RdSimulation *sim);

// # Safety
// `sim` must be NULL or a live handle.
uintptr_t rd_simulation_n_cells(const struct RdSimulation *sim);

// # Safety
// `sim` must be a live handle and `t` writable.
enum RdStatus rd_simulation_snapshot_time(const struct RdSimulation *sim, uintptr_t k, double *t);

// Copy species `species` (0-based) of snapshot `k` into `buf`, which must
// hold exactly `n_cells` doubles.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum RdStatus rd_simulation_copy_species(const struct RdSimulation *sim,
                                         uintptr_t k,
                                         uintptr_t species,
                                         double *buf,
                                         uintptr_t len);

// # Safety
// `sim` must be NULL or a handle not yet freed.
void rd_simulation_free(struct RdSimulation *sim);

// Run a full experiment (simulation, diagnostics, fits) without writing
// the configured output files. An aborted run still yields a handle.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RdStatus rd_experiment_run_json(const char *json, struct RdExperiment **out);

// Overall verdict; `RD_VERDICT_ABORTED` for NULL.
//
// # Safety
// `exp` must be NULL or a live handle.
enum RdVerdict rd_experiment_verdict(const struct RdExperiment *exp);

// Number of failed checks, or 0 for NULL.
//
// # Safety
// `exp` must be NULL or a live handle.
uintptr_t rd_experiment_failed_checks(const struct RdExperiment *exp);

// The JSON report; release with [`rd_string_free`]. NULL for a NULL handle.
//
// # Safety
// `exp` must be NULL or a live handle.
char *rd_experiment_report_json(const struct RdExperiment *exp);

// The trajectory CSV; release with [`rd_string_free`]. NULL on failure.
//
// # Safety
// `exp` must be NULL or a live handle.
char *rd_experiment_csv(const struct RdExperiment *exp);

// # Safety
// `exp` must be NULL or a handle not yet freed.
void rd_experiment_free(struct RdExperiment *exp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RDCHECK_H */
