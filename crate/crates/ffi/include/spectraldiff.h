#ifndef SPECTRALDIFF_H
#define SPECTRALDIFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Discretizations for [`sd_hybrid_new`].
 */
typedef enum SdScheme {
  SD_SCHEME_WEIGHTED = 0,
  SD_SCHEME_SPEC = 1,
} SdScheme;

/**
 * Status codes. `2..=5` match the CLI exit codes.
 */
typedef enum SdStatus {
  SD_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8 or a buffer that is too small.
   */
  SD_STATUS_INVALID_ARGUMENT = 1,
  SD_STATUS_CONFIG = 2,
  SD_STATUS_NUMERIC = 3,
  SD_STATUS_ESTIMATOR = 4,
  SD_STATUS_ROOT_FIND = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  SD_STATUS_INTERNAL = 70,
} SdStatus;

/**
 * Well shapes for [`sd_well_overlap`].
 */
typedef enum SdWellVariant {
  SD_WELL_VARIANT_HILLTOP = 0,
  SD_WELL_VARIANT_INFLECTION = 1,
} SdWellVariant;

/**
 * Hybrid-model spectrum with its overlaps.
 */
typedef struct SdHybrid SdHybrid;

/**
 * Assembled finite-difference matrix.
 */
typedef struct SdMatrix SdMatrix;

/**
 * Parsed operator document.
 */
typedef struct SdOperator SdOperator;

/**
 * Result of one estimator run.
 */
typedef struct SdEstimate {
  double lambda_hat;
  double lower;
  double upper;
  size_t levels;
  uint64_t shots_per_level;
  size_t degree;
  double alpha;
  uint64_t entry_oracle_calls;
  uint64_t row_col_oracle_calls;
  uint64_t state_prep_calls;
  uint64_t block_encoding_calls;
} SdEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next
 * `sd_*` call on the same thread.
 */
const char *sd_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sd_version(void);

/**
 * Parses an operator JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SdStatus sd_operator_from_json(const char *json, struct SdOperator **out);

/**
 * # Safety
 * `op` must come from [`sd_operator_from_json`] and not be used afterwards. Null is ignored.
 */
void sd_operator_free(struct SdOperator *op);

/**
 * Dimension of the operator's box.
 *
 * # Safety
 * `op` must be a live handle or null (returns 0).
 */
size_t sd_operator_dim(const struct SdOperator *op);

/**
 * Assembles the matrix on `n_gr` interior points per axis.
 *
 * # Safety
 * `op` must be a live handle and `out` a writable pointer.
 */
enum SdStatus sd_matrix_assemble(const struct SdOperator *op, size_t n_gr, struct SdMatrix **out);

/**
 * # Safety
 * `m` must come from [`sd_matrix_assemble`] and not be used afterwards. Null is ignored.
 */
void sd_matrix_free(struct SdMatrix *m);

/**
 * Number of rows, `n_gr^d`; 0 for null.
 *
 * # Safety
 * `m` must be a live handle or null.
 */
size_t sd_matrix_dim(const struct SdMatrix *m);

/**
 * Entry `(row, col)`; 0 outside the pattern or for null.
 *
 * # Safety
 * `m` must be a live handle or null.
 */
double sd_matrix_entry(const struct SdMatrix *m, size_t row, size_t col);

/**
 * The `k` smallest eigenvalues in ascending order, written to `values[0..k]`.
 *
 * # Safety
 * `m` must be a live handle and `values` must hold `k` doubles.
 */
enum SdStatus sd_smallest_eigenvalues(const struct SdMatrix *m, size_t k, double *values);

/**
 * One estimator run on `m` with the trial vector `trial[0..len]` and a JSON
 * configuration (`eps`, `delta`, `gamma`, optional `sampling`, `seed`).
 *
 * # Safety
 * `m` must be a live handle, `config_json` NUL-terminated, `trial` must hold
 * `len` doubles and `out` must be writable.
 */
enum SdStatus sd_est_eig(const struct SdMatrix *m,
                         const char *config_json,
                         const double *trial,
                         size_t len,
                         struct SdEstimate *out);

/**
 * Signed analytic overlap of the Gaussian test function of width `r` with the
 * `n`-th well eigenfunction.
 *
 * # Safety
 * `out` must be writable.
 */
enum SdStatus sd_well_overlap(enum SdWellVariant variant, size_t n, double r, double *out);

/**
 * Builds the nonuniform grid of the reference hybrid model at `scale`, and solves for
 * the first `k` eigenpairs.
 *
 * # Safety
 * `out` must be writable.
 */
enum SdStatus sd_hybrid_new(double scale, size_t k, enum SdScheme scheme, struct SdHybrid **out);

/**
 * # Safety
 * `h` must come from [`sd_hybrid_new`] and not be used afterwards. Null is ignored.
 */
void sd_hybrid_free(struct SdHybrid *h);

/**
 * Number of eigenpairs held; 0 for null.
 *
 * # Safety
 * `h` must be a live handle or null.
 */
size_t sd_hybrid_count(const struct SdHybrid *h);

/**
 * Eigenvalues in ascending order into `values[0..count]`.
 *
 * # Safety
 * `h` must be a live handle and `values` must hold `len` doubles.
 */
enum SdStatus sd_hybrid_eigenvalues(const struct SdHybrid *h, double *values, size_t len);

/**
 * Squared test-function overlaps into `values[0..count]`.
 *
 * # Safety
 * `h` must be a live handle and `values` must hold `len` doubles.
 */
enum SdStatus sd_hybrid_overlaps(const struct SdHybrid *h, double *values, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRALDIFF_H */
