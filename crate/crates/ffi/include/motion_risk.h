#ifndef MOTION_RISK_H
#define MOTION_RISK_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MrStatus {
  MR_STATUS_OK = 0,
  MR_STATUS_NULL_ARGUMENT = 1,
  MR_STATUS_INVALID_UTF8 = 2,
  MR_STATUS_PARSE_ERROR = 3,
  MR_STATUS_INVALID_ARGUMENT = 4,
  MR_STATUS_OUT_OF_RANGE = 5,
  MR_STATUS_INVALID_RULES = 6,
  MR_STATUS_ANALYSIS_FAILED = 7,
  MR_STATUS_PANIC = 8,
} MrStatus;

/**
 * Completed analysis with its rendered report.
 */
typedef struct MrAnalysis MrAnalysis;

/**
 * Parsed skeleton and pose sequence.
 */
typedef struct MrMotion MrMotion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mr_version(void);

/**
 * Message for the last failed call on this thread; empty after a
 * success. Valid until the next library call on the same thread.
 */
const char *mr_last_error_message(void);

/**
 * Parse mocap text or a pose interchange document (detected from the
 * content). `scale` is meters per mocap unit; pass 0 for the default.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MrStatus mr_motion_parse(const char *text, double scale, struct MrMotion **out);

/**
 * # Safety
 * `motion` must come from [`mr_motion_parse`] and not be used afterwards.
 */
void mr_motion_free(struct MrMotion *motion);

/**
 * # Safety
 * `motion` must be null or a live handle.
 */
size_t mr_motion_joint_count(const struct MrMotion *motion);

/**
 * # Safety
 * `motion` must be null or a live handle.
 */
size_t mr_motion_frame_count(const struct MrMotion *motion);

/**
 * Frame rate in Hz, or 0 for a null handle.
 *
 * # Safety
 * `motion` must be null or a live handle.
 */
double mr_motion_frame_rate(const struct MrMotion *motion);

/**
 * World joint positions (meters) of one frame, written as `x y z`
 * triples in joint order. `out_len` is the capacity in doubles and must
 * be at least `3 * joint_count`.
 *
 * # Safety
 * `out` must point to `out_len` writable doubles.
 */
enum MrStatus mr_motion_joint_positions(const struct MrMotion *motion,
                                        size_t frame,
                                        double *out,
                                        size_t out_len);

/**
 * Run the full pipeline with the shipped tables. `rules_json` may be
 * null to use the shipped rule set.
 *
 * # Safety
 * `motion` must be a live handle, `rules_json` null or NUL-terminated,
 * `out` a valid pointer.
 */
enum MrStatus mr_analyze(const struct MrMotion *motion,
                         double body_mass_kg,
                         const char *rules_json,
                         struct MrAnalysis **out);

/**
 * # Safety
 * `analysis` must come from [`mr_analyze`] and not be used afterwards.
 */
void mr_analysis_free(struct MrAnalysis *analysis);

/**
 * # Safety
 * `analysis` must be null or a live handle.
 */
size_t mr_analysis_incident_count(const struct MrAnalysis *analysis);

/**
 * Report document. Borrowed from the handle; do not free.
 *
 * # Safety
 * `analysis` must be null or a live handle.
 */
const char *mr_analysis_report_json(const struct MrAnalysis *analysis);

/**
 * Stream table as CSV. Caller frees with [`mr_string_free`].
 *
 * # Safety
 * `analysis` must be null or a live handle.
 */
char *mr_analysis_streams_csv(const struct MrAnalysis *analysis);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void mr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOTION_RISK_H */
