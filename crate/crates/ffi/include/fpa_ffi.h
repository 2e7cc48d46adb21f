#ifndef FPA_FFI_H
#define FPA_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FpaMethod {
  /**
   * Closed-form characterization.
   */
  FPA_METHOD_CLOSED = 0,
  /**
   * Exhaustive deviation check.
   */
  FPA_METHOD_BRUTE = 1,
} FpaMethod;

typedef enum FpaOutcome {
  FPA_OUTCOME_V_MINUS_ONE = 0,
  FPA_OUTCOME_V_MINUS_TWO = 1,
  FPA_OUTCOME_NOT_CONVERGED = 2,
} FpaOutcome;

/**
 * Result of every fallible call.
 */
typedef enum FpaStatus {
  FPA_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FPA_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument: bid outside its bid set, index out of range, bad UTF-8.
   */
  FPA_STATUS_DOMAIN = 2,
  /**
   * Invalid run or learner configuration.
   */
  FPA_STATUS_CONFIG = 3,
  /**
   * An enumeration would exceed its profile guard.
   */
  FPA_STATUS_CAPACITY = 4,
  /**
   * A result does not fit the requested output type.
   */
  FPA_STATUS_OVERFLOW = 5,
  /**
   * Internal error; the message names it.
   */
  FPA_STATUS_PANIC = 6,
} FpaStatus;

/**
 * Opaque set of pure equilibria.
 */
typedef struct FpaEquilibria FpaEquilibria;

/**
 * Opaque finished run.
 */
typedef struct FpaRecord FpaRecord;

/**
 * Opaque run configuration.
 */
typedef struct FpaRunConfig FpaRunConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null. Valid until the next failing
 * call on the same thread; do not free it.
 */
const char *fpa_last_error(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void fpa_string_free(char *s);

/**
 * Seed of run `index` of a batch with master seed `master`.
 */
uint64_t fpa_derive_run_seed(uint64_t master, uint64_t index);

/**
 * Whether `bids` is a pure Nash equilibrium for `values` (both length `n`).
 *
 * # Safety
 * `values` and `bids` must point to `n` readable values; `out` must be
 * writable.
 */
enum FpaStatus fpa_is_nash(const uint32_t *values, const uint32_t *bids, size_t n, bool *out);

/**
 * Expected utility of `bidder` bidding `bid` against the other bidders'
 * bids `others` (length `n - 1`, in bidder order), as an exact fraction.
 *
 * # Safety
 * `values` must point to `n` values and `others` to `n - 1`; `num` and
 * `den` must be writable.
 */
enum FpaStatus fpa_expected_utility(const uint32_t *values,
                                    size_t n,
                                    size_t bidder,
                                    uint32_t bid,
                                    const uint32_t *others,
                                    int64_t *num,
                                    int64_t *den);

/**
 * Pure equilibria of `values` (length `n`). `limit` caps the number of
 * profiles visited; 0 selects the default.
 *
 * # Safety
 * `values` must point to `n` values; `out` must be writable.
 */
enum FpaStatus fpa_equilibria_new(const uint32_t *values,
                                  size_t n,
                                  enum FpaMethod method,
                                  uint64_t limit,
                                  struct FpaEquilibria **out);

/**
 * Number of profiles in the set.
 *
 * # Safety
 * `set` must be a live handle.
 */
size_t fpa_equilibria_len(const struct FpaEquilibria *set);

/**
 * Copy profile `index` (in ascending lexicographic order) into `bids`,
 * which must hold `n` values.
 *
 * # Safety
 * `set` must be a live handle and `bids` writable for `n` values.
 */
enum FpaStatus fpa_equilibria_get(const struct FpaEquilibria *set,
                                  size_t index,
                                  uint32_t *bids,
                                  size_t n);

/**
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void fpa_equilibria_free(struct FpaEquilibria *set);

/**
 * Parse a run configuration from JSON (the `config` object of run.json).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FpaStatus fpa_run_config_from_json(const char *json, struct FpaRunConfig **out);

/**
 * Serialize a run configuration to JSON. Free the result with
 * [`fpa_string_free`].
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum FpaStatus fpa_run_config_to_json(const struct FpaRunConfig *config, char **out);

/**
 * Replace the seed of a configuration.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum FpaStatus fpa_run_config_set_seed(struct FpaRunConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be null or a handle not yet freed.
 */
void fpa_run_config_free(struct FpaRunConfig *config);

/**
 * Play the configured run.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum FpaStatus fpa_run(const struct FpaRunConfig *config, struct FpaRecord **out);

/**
 * # Safety
 * `record` must be a live handle.
 */
uint64_t fpa_record_rounds(const struct FpaRecord *record);

/**
 * # Safety
 * `record` must be a live handle.
 */
size_t fpa_record_bidders(const struct FpaRecord *record);

/**
 * Copy the bids of round `t` (1-based) into `bids`, which holds `n` values.
 *
 * # Safety
 * `record` must be a live handle and `bids` writable for `n` values.
 */
enum FpaStatus fpa_record_bids(const struct FpaRecord *record,
                               uint64_t t,
                               uint32_t *bids,
                               size_t n);

/**
 * Terminal frequency of `bid` for `bidder`.
 *
 * # Safety
 * `record` must be a live handle; `out` must be writable.
 */
enum FpaStatus fpa_record_frequency(const struct FpaRecord *record,
                                    size_t bidder,
                                    uint32_t bid,
                                    double *out);

/**
 * Verdict for the first top-value bidder at `threshold`.
 *
 * # Safety
 * `record` must be a live handle; `out` must be writable.
 */
enum FpaStatus fpa_record_verdict(const struct FpaRecord *record,
                                  double threshold,
                                  enum FpaOutcome *out);

/**
 * The run.json document of a record, without a verdict. Free the result
 * with [`fpa_string_free`].
 *
 * # Safety
 * `record` must be a live handle; `out` must be writable.
 */
enum FpaStatus fpa_record_to_json(const struct FpaRecord *record, char **out);

/**
 * # Safety
 * `record` must be null or a handle not yet freed.
 */
void fpa_record_free(struct FpaRecord *record);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPA_FFI_H */
