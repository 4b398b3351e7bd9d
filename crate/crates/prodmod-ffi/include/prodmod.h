/* C interface for the prodmod decision engine. */

#ifndef PRODMOD_H
#define PRODMOD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of one call.
 */
typedef enum ProdmodStatus {
  ProdmodStatus_Ok = 0,
  ProdmodStatus_NullArgument = 1,
  ProdmodStatus_InvalidUtf8 = 2,
  ProdmodStatus_ParseError = 3,
  ProdmodStatus_EngineError = 4,
} ProdmodStatus;

/**
 * Verdict of a decided problem.
 */
typedef enum ProdmodVerdict {
  ProdmodVerdict_Entailed = 0,
  ProdmodVerdict_NotEntailed = 1,
  ProdmodVerdict_Unknown = 2,
} ProdmodVerdict;

/**
 * Opaque result handle.
 */
typedef struct ProdmodResult ProdmodResult;

/**
 * Budgets for one decision run; zero means the built-in default, and a
 * zero time limit means no limit.
 */
typedef struct ProdmodOptions {
  uint64_t branch_limit;
  uint64_t omega_limit;
  uint32_t truncation_k;
  uint32_t jobs;
  uint64_t time_limit_ms;
} ProdmodOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default budgets.
 */
struct ProdmodOptions prodmod_options_default(void);

/**
 * Decide a problem given in the line-oriented text form, with defaults.
 *
 * # Safety
 * `problem_text` must be a NUL terminated string and `out` a valid slot.
 */
enum ProdmodStatus prodmod_decide(const char *problem_text, struct ProdmodResult **out);

/**
 * Decide a problem with explicit budgets.
 *
 * # Safety
 * Pointer arguments must be valid; `options` may be null for defaults.
 */
enum ProdmodStatus prodmod_decide_with_options(const char *problem_text,
                                               const struct ProdmodOptions *options,
                                               struct ProdmodResult **out);

/**
 * Verdict of a finished run; null handles answer `Unknown`.
 *
 * # Safety
 * `result` must be null or a handle from a decide call.
 */
enum ProdmodVerdict prodmod_result_verdict(const struct ProdmodResult *result);

/**
 * Full JSON report for a finished run; the caller frees the string.
 *
 * # Safety
 * `result` must be a handle from a decide call.
 */
char *prodmod_result_report_json(const struct ProdmodResult *result);

/**
 * Message for the most recent failure on this thread, or null.
 */
char *prodmod_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void prodmod_string_free(char *s);

/**
 * Release a result handle.
 *
 * # Safety
 * `result` must be null or a handle from a decide call, freed once.
 */
void prodmod_result_free(struct ProdmodResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRODMOD_H */
