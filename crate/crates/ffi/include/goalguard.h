#ifndef GOALGUARD_H
#define GOALGUARD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum GgStatus {
  GG_STATUS_OK = 0,
  GG_STATUS_NULL_POINTER = 1,
  GG_STATUS_INVALID_UTF8 = 2,
  GG_STATUS_PARSE_ERROR = 3,
  GG_STATUS_INVALID_ARGUMENT = 4,
  GG_STATUS_ANALYSIS_ERROR = 5,
  GG_STATUS_PANIC = 6,
} GgStatus;

typedef enum GgPreferenceMode {
  GG_PREFERENCE_MODE_CORRECTED = 0,
  GG_PREFERENCE_MODE_LITERAL = 1,
} GgPreferenceMode;

typedef enum GgHorizonPolicy {
  GG_HORIZON_POLICY_SHRINKING = 0,
  GG_HORIZON_POLICY_FIXED = 1,
} GgHorizonPolicy;

typedef enum GgVerdict {
  GG_VERDICT_CERTIFIED = 0,
  GG_VERDICT_REFUTED = 1,
  GG_VERDICT_NOT_APPLICABLE = 2,
} GgVerdict;

typedef enum GgReportKind {
  GG_REPORT_KIND_REACH = 0,
  GG_REPORT_KIND_VERIFY = 1,
  GG_REPORT_KIND_BOUND = 2,
  GG_REPORT_KIND_CERTIFY = 3,
} GgReportKind;

// Opaque problem handle: a model plus its task.
typedef struct GgProblem GgProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null. The pointer
// stays valid until the next goalguard call on the same thread.
const char *gg_last_error(void);

// Library version as a static nul-terminated string.
const char *gg_version(void);

// Parses a JSON problem. On success `*out` owns a handle to release with
// [`gg_problem_free`].
//
// # Safety
// `json` must be null or a valid nul-terminated string; `out` must be null
// or valid for writes.
enum GgStatus gg_problem_from_json(const char *json, struct GgProblem **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `problem` must be null or a handle from [`gg_problem_from_json`] that has
// not been freed.
void gg_problem_free(struct GgProblem *problem);

// # Safety
// `problem` must be null or a live handle.
size_t gg_problem_num_states(const struct GgProblem *problem);

// # Safety
// `problem` must be null or a live handle.
size_t gg_problem_num_actions(const struct GgProblem *problem);

// # Safety
// `problem` must be null or a live handle.
size_t gg_problem_num_goals(const struct GgProblem *problem);

// Serializes the problem back to JSON.
//
// # Safety
// `problem` must be null or a live handle; `out` must be null or valid for writes.
enum GgStatus gg_problem_to_json(const struct GgProblem *problem, char **out);

// Exclusive lower bound on the reward of goal `goal_index` (preference order).
//
// # Safety
// `problem` must be null or a live handle; `out` must be null or valid for writes.
enum GgStatus gg_goal_reward_lower_bound(const struct GgProblem *problem,
                                         size_t goal_index,
                                         double *out);

// Whether the full condition suite holds.
//
// # Safety
// `problem` must be null or a live handle; `holds` must be null or valid for writes.
enum GgStatus gg_verify(const struct GgProblem *problem,
                        enum GgPreferenceMode preference_mode,
                        bool *holds);

// Certifies the exhaustive planner. `explored` may be null.
//
// # Safety
// `problem` must be null or a live handle; `verdict` must be null or valid
// for writes; `explored` must be null or valid for writes.
enum GgStatus gg_certify(const struct GgProblem *problem,
                         enum GgHorizonPolicy horizon_policy,
                         enum GgVerdict *verdict,
                         size_t *explored);

// Success frequency of the exhaustive planner with random tie-breaking over
// `trials` rollouts seeded `seed, seed + 1, ...`.
//
// # Safety
// `problem` must be null or a live handle; `frequency` must be null or valid for writes.
enum GgStatus gg_estimate_success(const struct GgProblem *problem,
                                  size_t trials,
                                  uint64_t seed,
                                  double *frequency);

// Replaces goal rewards with synthesized ones (corrected mode).
//
// # Safety
// `problem` must be null or a live handle not used concurrently.
enum GgStatus gg_synthesize_rewards(struct GgProblem *problem, double margin_factor);

// JSON report identical to the CLI's `--output json` report for the
// corresponding command with default options.
//
// # Safety
// `problem` must be null or a live handle; `out` must be null or valid for writes.
enum GgStatus gg_report_json(const struct GgProblem *problem, enum GgReportKind kind, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string returned through an out-parameter of this
// library that has not been freed.
void gg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GOALGUARD_H */
