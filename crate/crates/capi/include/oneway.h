#ifndef ONEWAY_H
#define ONEWAY_H

/* Generated by cbindgen from oneway-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum {
  ONEWAY_STATUS_OK = 0,
  ONEWAY_STATUS_NULL_POINTER = 1,
  ONEWAY_STATUS_INVALID_ARGUMENT = 2,
  ONEWAY_STATUS_NUMERIC_ERROR = 3,
  ONEWAY_STATUS_IO_ERROR = 4,
  ONEWAY_STATUS_PANIC = 5,
} OnewayStatus;

/**
 * Opaque density operator.
 */
typedef struct OnewayDensity OnewayDensity;

/**
 * Opaque classical joint distribution.
 */
typedef struct OnewayJoint OnewayJoint;

/**
 * Opaque dense complex matrix.
 */
typedef struct OnewayMatrix OnewayMatrix;

/**
 * Opaque one-shot compression plan.
 */
typedef struct OnewayPlan OnewayPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Crate version as a static NUL-terminated string.
 */
const char *oneway_version(void);

/**
 * Copy the calling thread's last error message into `buffer` (truncated
 * to `len - 1` bytes, always NUL-terminated). Returns the full message
 * length in bytes.
 *
 * # Safety
 * `buffer` must point to `len` writable bytes, or be NULL (then only the
 * length is returned).
 */
uintptr_t oneway_last_error_message(char *buffer, uintptr_t len);

/**
 * Build a matrix from `rows*cols` interleaved `(re, im)` pairs in
 * row-major order. Returns NULL on error.
 *
 * # Safety
 * `interleaved` must point to `2*rows*cols` doubles.
 */
OnewayMatrix *oneway_matrix_new(uintptr_t rows, uintptr_t cols, const double *interleaved);

/**
 * # Safety
 * `matrix` must come from `oneway_matrix_new` (or another constructor in
 * this library) and not have been freed.
 */
void oneway_matrix_free(OnewayMatrix *matrix);

/**
 * Read entry `(i, j)`.
 *
 * # Safety
 * `matrix` must be a live handle; `re` and `im` must be writable.
 */
OnewayStatus oneway_matrix_get(const OnewayMatrix *matrix,
                               uintptr_t i,
                               uintptr_t j,
                               double *re,
                               double *im);

/**
 * Pseudo-inverse square root of a PSD matrix (support cutoff 1e-10).
 * Returns NULL and sets the error message on failure.
 *
 * # Safety
 * `matrix` must be a live handle.
 */
OnewayMatrix *oneway_mat_inv_sqrt(const OnewayMatrix *matrix);

/**
 * Validate a density operator from interleaved `(re, im)` pairs.
 *
 * # Safety
 * `interleaved` must point to `2*dim*dim` doubles.
 */
OnewayDensity *oneway_density_new(uintptr_t dim, const double *interleaved);

/**
 * # Safety
 * `density` must be a live handle from this library.
 */
void oneway_density_free(OnewayDensity *density);

/**
 * Trace distance `0.5 * trace-norm(a - b)`.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
OnewayStatus oneway_trace_distance(const OnewayDensity *a, const OnewayDensity *b, double *out);

/**
 * Max-relative entropy `D_max(rho || sigma)` in bits.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
OnewayStatus oneway_dmax(const OnewayDensity *rho, const OnewayDensity *sigma, double *out);

/**
 * Optimal binary guessing probability `0.5 * (1 + trace-norm(p0*rho0 - p1*rho1))`.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
OnewayStatus oneway_helstrom_opt(double p0,
                                 const OnewayDensity *rho0,
                                 double p1,
                                 const OnewayDensity *rho1,
                                 double *out);

/**
 * PGM optimality transfer function `g(x) = x^2 + (1-x)^2/(d-1)`.
 *
 * # Safety
 * `out` must be writable.
 */
OnewayStatus oneway_g_function(double x, uintptr_t d, double *out);

/**
 * Guessing probability of the pretty good measurement on the ensemble
 * `{weights[i], states[i]}`.
 *
 * # Safety
 * `weights` and `states` must point to `count` entries of live handles.
 */
OnewayStatus oneway_pgm_guess_prob(const double *weights,
                                   const OnewayDensity *const *states,
                                   uintptr_t count,
                                   double *out);

/**
 * Build a classical joint from a row-major `p(x, c)` table.
 *
 * # Safety
 * `probs` must point to `x_count*c_count` doubles.
 */
OnewayJoint *oneway_joint_new(uintptr_t x_count, uintptr_t c_count, const double *probs);

/**
 * # Safety
 * `joint` must be a live handle from this library.
 */
void oneway_joint_free(OnewayJoint *joint);

/**
 * Classical max-information `I_max(X:C)` in bits.
 *
 * # Safety
 * `joint` must be live; `lambda_out` writable.
 */
OnewayStatus oneway_imax_classical(const OnewayJoint *joint, double *lambda_out);

/**
 * Build a one-shot compression plan for the channel of `joint` at failure
 * budget `eta`.
 *
 * # Safety
 * `joint` must be a live handle.
 */
OnewayPlan *oneway_plan_new(const OnewayJoint *joint, double eta);

/**
 * # Safety
 * `plan` must be a live handle from this library.
 */
void oneway_plan_free(OnewayPlan *plan);

/**
 * Plan parameters: `I_max` in bits, candidate count `N`, message bits,
 * and the analytic rejection probability. NULL outputs are skipped.
 *
 * # Safety
 * `plan` must be live; non-NULL outputs writable.
 */
OnewayStatus oneway_plan_info(const OnewayPlan *plan,
                              double *lambda_bits,
                              uint64_t *candidate_count,
                              uint32_t *message_bits,
                              double *rejection_prob);

/**
 * One compression round for symbol `x` under shared seed `seed`: the
 * transmitted index (0 means total rejection) and Bob's decoded symbol.
 *
 * # Safety
 * `plan` must be live; non-NULL outputs writable.
 */
OnewayStatus oneway_plan_run(const OnewayPlan *plan,
                             uintptr_t x,
                             uint64_t seed,
                             uint64_t *message_out,
                             uintptr_t *decoded_out);

/**
 * Execute a TOML experiment config and write the JSON report (plus a CSV
 * summary next to it). `pass_out` receives whether every check passed.
 *
 * # Safety
 * `config_path` and `report_path` must be NUL-terminated strings;
 * `pass_out` writable or NULL.
 */
OnewayStatus oneway_run_config(const char *config_path, const char *report_path, bool *pass_out);

/**
 * Exact distributional error of the quantum protocol stored at
 * `protocol_path` (JSON) against the task stored at `task_path`.
 *
 * # Safety
 * Paths must be NUL-terminated strings; `error_out` writable.
 */
OnewayStatus oneway_protocol_exact_error(const char *protocol_path,
                                         const char *task_path,
                                         bool worst_case_y,
                                         double *error_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONEWAY_H */
