#ifndef NVCERT_H
#define NVCERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NvcertStatus {
  NVCERT_STATUS_OK = 0,
  NVCERT_STATUS_NULL_POINTER = 1,
  NVCERT_STATUS_INVALID_ARGUMENT = 2,
  NVCERT_STATUS_COMPOSITE = 3,
  NVCERT_STATUS_REGIME = 4,
  NVCERT_STATUS_UNSUPPORTED = 5,
  NVCERT_STATUS_BUDGET = 6,
  NVCERT_STATUS_IO = 7,
  NVCERT_STATUS_SCHEMA = 8,
  NVCERT_STATUS_INSUFFICIENT_DATA = 9,
  NVCERT_STATUS_NOT_FOUND = 10,
  NVCERT_STATUS_PANIC = 11,
} NvcertStatus;

typedef enum NvcertMode {
  NVCERT_MODE_FIRST = 0,
  NVCERT_MODE_IMPROVED = 1,
} NvcertMode;

typedef enum NvcertFamily {
  NVCERT_FAMILY_X0_PLUS = 0,
  NVCERT_FAMILY_XNS_PLUS = 1,
} NvcertFamily;

typedef enum NvcertCondition {
  NVCERT_CONDITION_A1_POSITIVE = 0,
  NVCERT_CONDITION_A2_POSITIVE = 1,
  NVCERT_CONDITION_RATIO = 2,
} NvcertCondition;

typedef enum NvcertLevelVerdict {
  NVCERT_LEVEL_VERDICT_THEOREM2_HOLDS = 0,
  NVCERT_LEVEL_VERDICT_FAILS_TO_CERTIFY = 1,
  NVCERT_LEVEL_VERDICT_INSUFFICIENT_DATA = 2,
} NvcertLevelVerdict;

/**
 * Opaque set of newform records.
 */
typedef struct NvcertNewforms NvcertNewforms;

/**
 * Closed interval `[lo, hi]` containing the true value.
 */
typedef struct NvcertInterval {
  double lo;
  double hi;
} NvcertInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. Valid until the next
 * call on the same thread.
 */
const char *nvcert_last_error(void);

/**
 * Library version as a static string.
 */
const char *nvcert_version(void);

/**
 * `E1(x)` for `x > 0`.
 *
 * # Safety
 * `result` must be null or valid for writes.
 */
enum NvcertStatus nvcert_e1(double x, struct NvcertInterval *result);

/**
 * `J1(x)` for finite `x ≥ 0`.
 *
 * # Safety
 * `result` must be null or valid for writes.
 */
enum NvcertStatus nvcert_bessel_j1(double x, struct NvcertInterval *result);

/**
 * Kloosterman sum `S(m, n; c)`, `c ≥ 1`.
 *
 * # Safety
 * `result` must be null or valid for writes.
 */
enum NvcertStatus nvcert_kloosterman(uint64_t m,
                                     uint64_t n,
                                     uint64_t c,
                                     struct NvcertInterval *result);

/**
 * Closed-form enclosure of the normalized first moment `<a_m, L'>^+_M / 4π`.
 *
 * # Safety
 * `result` must be null or valid for writes.
 */
enum NvcertStatus nvcert_moment_plus_bound(uint64_t m,
                                           uint64_t level,
                                           enum NvcertMode mode,
                                           struct NvcertInterval *result);

/**
 * Decides one threshold condition at a prime. `certified` is set to 1 or 0.
 *
 * # Safety
 * `certified` must be null or valid for writes.
 */
enum NvcertStatus nvcert_certify_at(enum NvcertFamily family,
                                    enum NvcertCondition condition,
                                    enum NvcertMode mode,
                                    uint64_t prime,
                                    bool *certified);

/**
 * Largest possible number of rational points from the explicit bound.
 *
 * # Safety
 * `result` must be null or valid for writes.
 */
enum NvcertStatus nvcert_point_count_bound(uint64_t p,
                                           uint64_t genus,
                                           uint64_t fp_count,
                                           uint64_t nv_product,
                                           uint64_t *result);

/**
 * Loads a newform JSONL file. Release the handle with [`nvcert_newforms_free`].
 *
 * # Safety
 * `path` must be null or a nul-terminated string; `handle` null or valid for writes.
 */
enum NvcertStatus nvcert_newforms_load(const char *path, struct NvcertNewforms **handle);

/**
 * Number of records in the set.
 *
 * # Safety
 * `handle` must be null or live; `count` null or valid for writes.
 */
enum NvcertStatus nvcert_newforms_count(const struct NvcertNewforms *handle, size_t *count);

/**
 * Releases a handle from [`nvcert_newforms_load`]. Null is ignored.
 *
 * # Safety
 * `handle` must be null or a live handle not used afterwards.
 */
void nvcert_newforms_free(struct NvcertNewforms *handle);

/**
 * `L'(f, 1)` for the record with `label` using `truncation` coefficients;
 * 0 means all ingested coefficients.
 *
 * # Safety
 * `handle` must be null or live, `label` null or nul-terminated, `result` null or valid for writes.
 */
enum NvcertStatus nvcert_lprime_at_1(const struct NvcertNewforms *handle,
                                     const char *label,
                                     size_t truncation,
                                     struct NvcertInterval *result);

/**
 * Theorem-2 verdict at `level` from the records of that level in the set.
 *
 * # Safety
 * `handle` must be null or live; the out pointers null or valid for writes.
 */
enum NvcertStatus nvcert_level_verdict(const struct NvcertNewforms *handle,
                                       uint64_t level,
                                       uint64_t plus_dimension,
                                       size_t budget,
                                       enum NvcertLevelVerdict *verdict,
                                       uint64_t *certified_dimension);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NVCERT_H */
