#ifndef HALVING_LAB_H
#define HALVING_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_PARSE = 2,
  HL_STATUS_PRECONDITION = 3,
  HL_STATUS_INTERNAL = 4,
  HL_STATUS_INVALID_UTF8 = 5,
  HL_STATUS_PANIC = 6,
} HlStatus;

/**
 * A forcing condition.
 */
typedef struct HlCondition HlCondition;

/**
 * A parsed set schema.
 */
typedef struct HlSchema HlSchema;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hl_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void hl_string_free(char *s);

/**
 * Parses a schema in the text grammar.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum HlStatus hl_schema_parse(const char *text, struct HlSchema **out);

/**
 * # Safety
 * `schema` must come from `hl_schema_parse` and not have been freed.
 */
void hl_schema_free(struct HlSchema *schema);

/**
 * Canonical text of a schema.
 *
 * # Safety
 * `schema` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_schema_to_string(const struct HlSchema *schema, char **out);

/**
 * # Safety
 * `schema` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_schema_contains(const struct HlSchema *schema, uint64_t n, bool *out);

/**
 * `|X ∩ [0, n)|`.
 *
 * # Safety
 * `schema` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_schema_count_below(const struct HlSchema *schema, uint64_t n, uint64_t *out);

/**
 * `|X ∩ n| / n` as a `p/q` string.
 *
 * # Safety
 * `schema` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_initial_density(const struct HlSchema *schema, uint64_t n, char **out);

/**
 * `|S ∩ X ∩ n| / |X ∩ n|` as a `p/q` string.
 *
 * # Safety
 * `s` and `x` must be live handles; `out` must be writable.
 */
enum HlStatus hl_relative_density(const struct HlSchema *s,
                                  const struct HlSchema *x,
                                  uint64_t n,
                                  char **out);

/**
 * Reads a condition from its JSON form.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum HlStatus hl_condition_from_json(const char *json, struct HlCondition **out);

/**
 * # Safety
 * `condition` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_condition_to_json(const struct HlCondition *condition, char **out);

/**
 * # Safety
 * `condition` must come from this library and not have been freed.
 */
void hl_condition_free(struct HlCondition *condition);

/**
 * # Safety
 * `condition` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_condition_n(const struct HlCondition *condition, uint64_t *out);

/**
 * Number of violated clauses; `0` means valid. The first violation, if
 * any, becomes the thread's last error message even though the call
 * succeeds.
 *
 * # Safety
 * `condition` must be a live handle; `violations` must be writable.
 */
enum HlStatus hl_condition_validate(const struct HlCondition *condition, size_t *violations);

/**
 * Whether `q ≤ p`.
 *
 * # Safety
 * `q` and `p` must be live handles; `out` must be writable.
 */
enum HlStatus hl_condition_leq(const struct HlCondition *q, const struct HlCondition *p, bool *out);

/**
 * Final condition of the standard run on `index_count` ids.
 *
 * # Safety
 * `out` must be writable.
 */
enum HlStatus hl_condition_generic_run(size_t index_count,
                                       size_t rounds,
                                       uint64_t min_horizon,
                                       uint64_t seed,
                                       struct HlCondition **out);

/**
 * Number of trials, out of `trials`, whose walk returns to zero within
 * `steps` elements of `x`.
 *
 * # Safety
 * `x` must be a live handle; `successes` must be writable.
 */
enum HlStatus hl_estimate_recurrence(const struct HlSchema *x,
                                     uint64_t steps,
                                     uint64_t trials,
                                     uint64_t seed,
                                     uint64_t *successes);

/**
 * Natural log of `N · 16n² · exp(-⌈N·P⌉ / c n²)` with `P = p_num/p_den`
 * in `(0, 1]`
 * and `c = 8` when `derived` is nonzero, `2` otherwise.
 *
 * # Safety
 * `out` must be writable.
 */
enum HlStatus hl_delta_n_ln(uint64_t big_n,
                            uint64_t p_num,
                            uint64_t p_den,
                            uint64_t n,
                            bool derived,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HALVING_LAB_H */
