#ifndef CANNINGS_H
#define CANNINGS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CanningsStatus {
  CANNINGS_STATUS_OK = 0,
  CANNINGS_STATUS_INVALID_ARGUMENT = 1,
  CANNINGS_STATUS_DOMAIN_VIOLATION = 2,
  CANNINGS_STATUS_UNSUPPORTED = 3,
  CANNINGS_STATUS_CAP_EXCEEDED = 4,
  CANNINGS_STATUS_PARSE_ERROR = 5,
  CANNINGS_STATUS_NULL_POINTER = 6,
  CANNINGS_STATUS_INCOMPLETE = 7,
  CANNINGS_STATUS_INTERNAL = 8,
} CanningsStatus;

/**
 * A transition matrix over labeled partitions, exact or estimated.
 */
typedef struct CanningsMatrix CanningsMatrix;

/**
 * A validated finite population model.
 */
typedef struct CanningsModel CanningsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *cannings_last_error_message(void);

const char *cannings_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void cannings_string_free(char *s);

/**
 * Parses a model from its JSON text (`{"d","N","law","counts"}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CanningsStatus cannings_model_from_json(const char *json, struct CanningsModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`cannings_model_from_json`], not yet freed.
 */
void cannings_model_free(struct CanningsModel *model);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum CanningsStatus cannings_model_d(const struct CanningsModel *model, size_t *out);

/**
 * `|P_{n,E}|` for `d` types. Fails with `CAP_EXCEEDED` beyond 64 bits.
 *
 * # Safety
 * `out` must be writable.
 */
enum CanningsStatus cannings_partition_count(size_t n, size_t d, uint64_t *out);

/**
 * Exact one-step transition matrix on `n` samples.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum CanningsStatus cannings_transition_matrix(const struct CanningsModel *model,
                                               size_t n,
                                               struct CanningsMatrix **out);

/**
 * Monte-Carlo estimate of the transition matrix from `reps` one-step
 * simulations per state.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum CanningsStatus cannings_mc_estimate(const struct CanningsModel *model,
                                         size_t n,
                                         size_t reps,
                                         uint64_t seed,
                                         struct CanningsMatrix **out);

/**
 * # Safety
 * `matrix` must be null or a live handle.
 */
void cannings_matrix_free(struct CanningsMatrix *matrix);

/**
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum CanningsStatus cannings_matrix_dim(const struct CanningsMatrix *matrix, size_t *out);

/**
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum CanningsStatus cannings_matrix_entry_f64(const struct CanningsMatrix *matrix,
                                              size_t row,
                                              size_t col,
                                              double *out);

/**
 * Entry as a fraction string such as `"1/8"`. `UNSUPPORTED` for estimated
 * matrices. Free the result with [`cannings_string_free`].
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum CanningsStatus cannings_matrix_entry_fraction(const struct CanningsMatrix *matrix,
                                                   size_t row,
                                                   size_t col,
                                                   char **out);

/**
 * Text form of state `index`, e.g. `"1,2:1"`. Free with [`cannings_string_free`].
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum CanningsStatus cannings_matrix_state(const struct CanningsMatrix *matrix,
                                          size_t index,
                                          char **out);

/**
 * CSV with a header row of states; exact matrices use fraction entries.
 * Free with [`cannings_string_free`].
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum CanningsStatus cannings_matrix_to_csv(const struct CanningsMatrix *matrix, char **out);

/**
 * Runs the consistency check up to `depth` lineages. `passed` receives the
 * verdict; `report_json`, if not null, receives the report as JSON text
 * (free with [`cannings_string_free`]).
 *
 * # Safety
 * `model` must be a live handle; `passed` must be writable; `report_json`
 * must be null or writable.
 */
enum CanningsStatus cannings_check_consistency(const struct CanningsModel *model,
                                               size_t depth,
                                               bool *passed,
                                               char **report_json);

/**
 * Rate of a diagonal tensor under a Xi coalescent. `spec_json` describes the measure.
 * `diag` lists the slot sizes per type, e.g. `"2,2;3"`.
 *
 * # Safety
 * Both strings must be NUL-terminated; `out` must be writable.
 */
enum CanningsStatus cannings_xi_rate(const char *spec_json, const char *diag, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CANNINGS_H */
