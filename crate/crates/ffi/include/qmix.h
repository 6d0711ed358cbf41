#ifndef QMIX_H
#define QMIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call. Zero is success.
 */
typedef enum QmixStatus {
  QMIX_STATUS_OK = 0,
  QMIX_STATUS_NULL_POINTER = 1,
  QMIX_STATUS_INVALID_ARGUMENT = 2,
  QMIX_STATUS_DIMENSION_MISMATCH = 3,
  QMIX_STATUS_NON_SQUARE = 4,
  QMIX_STATUS_NOT_HERMITIAN = 5,
  QMIX_STATUS_NOT_ANTI_HERMITIAN = 6,
  QMIX_STATUS_NOT_POSITIVE = 7,
  QMIX_STATUS_TRACE_NOT_ONE = 8,
  QMIX_STATUS_RANK_OUT_OF_RANGE = 9,
  QMIX_STATUS_RANK_ONE = 10,
  QMIX_STATUS_NOT_PURIFIABLE = 11,
  QMIX_STATUS_NOT_UNITARY = 12,
  QMIX_STATUS_DRIFT_EXCEEDED = 13,
  QMIX_STATUS_NOT_NORMALIZED = 14,
  QMIX_STATUS_SCHEMA = 15,
  /**
   * Internal numerical inconsistency: pairing, orthogonality, adjoint image.
   */
  QMIX_STATUS_NUMERICAL = 16,
  QMIX_STATUS_PANIC = 17,
} QmixStatus;

typedef enum QmixClassification {
  QMIX_CLASSIFICATION_PROPER = 0,
  QMIX_CLASSIFICATION_IMPROPER = 1,
} QmixClassification;

/**
 * Validated quaternionic density matrix.
 */
typedef struct QmixDensity QmixDensity;

/**
 * Quaternionic matrix `alpha + j beta`.
 */
typedef struct QmixMatrix QmixMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next `qmix_*` call on the same thread.
 */
const char *qmix_last_error_message(void);

/**
 * Build a matrix from interleaved row-major blocks of `2 * rows * cols`
 * doubles. `beta` may be null for a complex matrix.
 *
 * # Safety
 * `alpha` (and `beta` when non-null) must point to `2 * rows * cols` doubles.
 */
enum QmixStatus qmix_matrix_new(size_t rows,
                                size_t cols,
                                const double *alpha,
                                const double *beta,
                                struct QmixMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void qmix_matrix_free(struct QmixMatrix *m);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t qmix_matrix_rows(const struct QmixMatrix *m);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t qmix_matrix_cols(const struct QmixMatrix *m);

/**
 * Copy the blocks out. Either destination may be null to skip it.
 *
 * # Safety
 * `m` must be a live handle; non-null destinations must hold
 * `2 * rows * cols` doubles.
 */
enum QmixStatus qmix_matrix_blocks(const struct QmixMatrix *m, double *alpha, double *beta);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QmixStatus qmix_matrix_from_json(const char *json, struct QmixMatrix **out);

/**
 * Canonical JSON; release with [`qmix_string_free`].
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum QmixStatus qmix_matrix_to_json(const struct QmixMatrix *m, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void qmix_string_free(char *s);

/**
 * Validate `m` as a density matrix. `tol <= 0` selects the default.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum QmixStatus qmix_density_validate(const struct QmixMatrix *m,
                                      double tol,
                                      struct QmixDensity **out);

/**
 * # Safety
 * `d` must be null or a handle from this library not yet freed.
 */
void qmix_density_free(struct QmixDensity *d);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum QmixStatus qmix_density_classification(const struct QmixDensity *d,
                                            enum QmixClassification *out);

/**
 * `|rho_beta|_F`, or NaN for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
double qmix_density_beta_norm(const struct QmixDensity *d);

/**
 * Quaternionic rank, or 0 for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
size_t qmix_density_rank(const struct QmixDensity *d);

/**
 * Copy of the density as a matrix handle.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum QmixStatus qmix_density_matrix(const struct QmixDensity *d, struct QmixMatrix **out);

/**
 * Complex projection `rho_alpha`, returned as a matrix with zero beta.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum QmixStatus qmix_density_project(const struct QmixDensity *d, struct QmixMatrix **out);

/**
 * Quaternionic density of rank `rank` whose projection is `rho_alpha`
 * (a complex matrix, zero beta).
 *
 * # Safety
 * `rho_alpha` must be a live handle; `out` must be writable.
 */
enum QmixStatus qmix_lift(const struct QmixMatrix *rho_alpha,
                          size_t rank,
                          struct QmixDensity **out);

/**
 * Rank-one quaternionic density projecting onto a rank <= 2 `rho_alpha`.
 *
 * # Safety
 * `rho_alpha` must be a live handle; `out` must be writable.
 */
enum QmixStatus qmix_purify(const struct QmixMatrix *rho_alpha, struct QmixDensity **out);

/**
 * `Re Tr(A rho)` for a hermitian quaternionic observable `A`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum QmixStatus qmix_expectation(const struct QmixMatrix *observable,
                                 const struct QmixDensity *d,
                                 double *out);

/**
 * Evolve under the constant anti-hermitian generator `h` for time `t` with
 * `steps` RK4 steps.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum QmixStatus qmix_evolve(const struct QmixDensity *d,
                            const struct QmixMatrix *h,
                            double t,
                            size_t steps,
                            struct QmixDensity **out);

/**
 * Run the system/apparatus scenario and return its JSON report; release
 * with [`qmix_string_free`]. Angles are the polar and azimuthal angle of
 * the spin axis in radians.
 *
 * # Safety
 * `out` must be writable.
 */
enum QmixStatus qmix_scenario_json(double c_plus_re,
                                   double c_plus_im,
                                   double c_minus_re,
                                   double c_minus_im,
                                   double theta,
                                   double phi,
                                   char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMIX_H */
