#ifndef ESFCHECK_H
#define ESFCHECK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum {
  ESF_STATUS_OK = 0,
  /**
   * Bad parameters, e.g. `k > n` or `a = 0`.
   */
  ESF_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input JSON could not be parsed as a certificate.
   */
  ESF_STATUS_PARSE = 2,
  /**
   * A certificate was checked and rejected.
   */
  ESF_STATUS_VERIFY_FAILED = 3,
  /**
   * No witness prime exists for the query.
   */
  ESF_STATUS_NOT_FOUND = 4,
  ESF_STATUS_NULL_POINTER = 5,
  /**
   * Anything else, including a caught panic.
   */
  ESF_STATUS_INTERNAL = 6,
} EsfStatus;

/**
 * Opaque streaming engine for `S_{a,b}(n, k)`, `k <= kmax`.
 */
typedef struct EsfHandle EsfHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, static storage.
 */
const char *esfcheck_version(void);

/**
 * Copy of the last error message on this thread, or null if none.
 * Free with `esfcheck_string_free`.
 */
char *esfcheck_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void esfcheck_string_free(char *s);

/**
 * Creates an engine at `n = 0`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
EsfStatus esfcheck_state_new(uint64_t a, uint64_t b, uint32_t kmax, EsfHandle **out);

/**
 * # Safety
 * `h` must be null or a handle from `esfcheck_state_new`, not yet freed.
 */
void esfcheck_state_free(EsfHandle *h);

/**
 * Advances the engine to `n` terms; never moves backwards.
 *
 * # Safety
 * `h` must be a live handle.
 */
EsfStatus esfcheck_state_advance_to(EsfHandle *h, uint64_t n);

/**
 * Current number of terms, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
uint64_t esfcheck_state_n(const EsfHandle *h);

/**
 * `S(n, k)` at the engine's current `n`, as `p/q` or an integer.
 *
 * # Safety
 * `h` must be a live handle and `out` valid for a pointer write.
 */
EsfStatus esfcheck_state_value(const EsfHandle *h, uint32_t k, char **out);

/**
 * # Safety
 * `h` must be a live handle and `out` valid for a write.
 */
EsfStatus esfcheck_state_is_integer(const EsfHandle *h, uint32_t k, bool *out);

/**
 * Exact `S_{a,b}(n, k)` as a string.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
EsfStatus esfcheck_compute(uint64_t a, uint64_t b, uint64_t n, uint64_t k, char **out);

/**
 * Decision JSON. `certify = false` answers from the exception set alone.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
EsfStatus esfcheck_decide_json(uint64_t a,
                               uint64_t b,
                               uint64_t n,
                               uint64_t k,
                               bool certify,
                               char **out);

/**
 * Valuation certificate JSON; `NotFound` when no witness prime qualifies.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
EsfStatus esfcheck_witness_json(uint64_t a, uint64_t b, uint64_t n, uint64_t k, char **out);

/**
 * Checks a certificate. Returns `Ok` when it passes, `VerifyFailed` when it
 * is rejected; in both cases `report_out`, if non-null, receives the
 * report JSON.
 *
 * # Safety
 * `cert_json` must be a NUL-terminated string; `report_out` null or valid
 * for a pointer write.
 */
EsfStatus esfcheck_verify_json(const char *cert_json, bool exhaustive, char **report_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ESFCHECK_H */
