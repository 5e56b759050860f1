#ifndef IOPV_H
#define IOPV_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum IopvStatus {
  IOPV_STATUS_OK = 0,
  IOPV_STATUS_NULL_ARGUMENT = 1,
  IOPV_STATUS_INVALID_UTF8 = 2,
  IOPV_STATUS_PARSE = 3,
  IOPV_STATUS_INVALID_PROTOCOL = 4,
  IOPV_STATUS_DIMENSION_MISMATCH = 5,
  IOPV_STATUS_RESOURCE_LIMIT = 6,
  IOPV_STATUS_INVALID_MACHINE = 7,
  IOPV_STATUS_OVERFLOW = 8,
  IOPV_STATUS_INTERNAL = 9,
} IopvStatus;

typedef enum IopvDirection {
  IOPV_DIRECTION_POST = 0,
  IOPV_DIRECTION_PRE = 1,
} IopvDirection;

typedef enum IopvVerdictKind {
  IOPV_VERDICT_KIND_WELL_SPECIFIED = 0,
  IOPV_VERDICT_KIND_ILL_SPECIFIED = 1,
  IOPV_VERDICT_KIND_CORRECT = 2,
  IOPV_VERDICT_KIND_INCORRECT = 3,
} IopvVerdictKind;

typedef enum IopvViolation {
  IOPV_VIOLATION_NONE = 0,
  IOPV_VIOLATION_CONDITION1 = 1,
  IOPV_VIOLATION_CONDITION2 = 2,
  IOPV_VIOLATION_WRONG_VALUE0 = 3,
  IOPV_VIOLATION_WRONG_VALUE1 = 4,
} IopvViolation;

/**
 * A parsed protocol file.
 */
typedef struct IopvProtocol IopvProtocol;

/**
 * Outcome of a well-specification or correctness check.
 */
typedef struct IopvVerdict IopvVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *iopv_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *iopv_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void iopv_string_free(char *s);

/**
 * Parses a protocol in the text file format.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` writable.
 */
enum IopvStatus iopv_protocol_parse(const char *text, struct IopvProtocol **out);

/**
 * # Safety
 * `p` must come from [`iopv_protocol_parse`] or be null.
 */
void iopv_protocol_free(struct IopvProtocol *p);

/**
 * Number of states, or 0 for a null handle.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
size_t iopv_protocol_num_states(const struct IopvProtocol *p);

/**
 * Name of state `index` as a new string, or null when out of range.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
char *iopv_protocol_state_name(const struct IopvProtocol *p, size_t index);

/**
 * Prints the protocol back in the file format.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum IopvStatus iopv_protocol_print(const struct IopvProtocol *p, char **out);

/**
 * Decides well-specification. `init` is a constraint over the state
 * names, or null for the input configurations (or the file's
 * `init-config`). `max_minterms` of 0 selects the default limit.
 *
 * # Safety
 * Pointers must be valid; `init` may be null.
 */
enum IopvStatus iopv_check(const struct IopvProtocol *p,
                           const char *init,
                           size_t max_minterms,
                           struct IopvVerdict **out);

/**
 * Checks that the protocol computes `pred`, a constraint over the input
 * variables.
 *
 * # Safety
 * Pointers must be valid.
 */
enum IopvStatus iopv_correct(const struct IopvProtocol *p,
                             const char *pred,
                             size_t max_minterms,
                             struct IopvVerdict **out);

/**
 * Forward or backward reachability closure of `from`, serialized one
 * minterm per line (empty string for the empty set).
 *
 * # Safety
 * Pointers must be valid.
 */
enum IopvStatus iopv_closure(const struct IopvProtocol *p,
                             const char *from,
                             enum IopvDirection dir,
                             size_t max_minterms,
                             char **out);

/**
 * Encodes a Turing machine file as a protocol file with an
 * `init-config`. `input` is a space-separated word, or null to use the
 * machine file's own input line.
 *
 * # Safety
 * Pointers must be valid; `input` may be null.
 */
enum IopvStatus iopv_tm_generate(const char *tm_text, const char *input, char **out);

/**
 * # Safety
 * `v` must come from this library or be null.
 */
void iopv_verdict_free(struct IopvVerdict *v);

/**
 * # Safety
 * `v` must be a live handle.
 */
enum IopvVerdictKind iopv_verdict_kind(const struct IopvVerdict *v);

/**
 * # Safety
 * `v` must be a live handle.
 */
enum IopvViolation iopv_verdict_violation(const struct IopvVerdict *v);

/**
 * Witness over the original states as `name:count` pairs, or null when
 * the verdict is positive.
 *
 * # Safety
 * `v` must be a live handle.
 */
char *iopv_verdict_witness(const struct IopvVerdict *v);

/**
 * Same text the command line prints, optionally with statistics.
 *
 * # Safety
 * `v` must be a live handle.
 */
char *iopv_verdict_text(const struct IopvVerdict *v, bool with_stats);

/**
 * `key=value` rendering of the verdict.
 *
 * # Safety
 * `v` must be a live handle.
 */
char *iopv_verdict_kv(const struct IopvVerdict *v, bool with_stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IOPV_H */
