#ifndef HPS_H
#define HPS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum HpsStatus {
  HPS_STATUS_OK = 0,
  HPS_STATUS_INVALID_ARGUMENT = 1,
  HPS_STATUS_DATA_FORMAT = 2,
  HPS_STATUS_INTERNAL = 3,
  HPS_STATUS_NO_CLASSIFICATION = 4,
} HpsStatus;

/**
 * Opaque case description.
 */
typedef struct HpsCase HpsCase;

/**
 * Opaque set of trained pools together with the encoding settings used to
 * classify against them.
 */
typedef struct HpsPools HpsPools;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hps_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void hps_string_free(char *s);

/**
 * Parses a case from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum HpsStatus hps_case_from_json(const char *json, struct HpsCase **out);

/**
 * Serializes a case to JSON; free the result with `hps_string_free`.
 *
 * # Safety
 * `handle` must be a live handle; `out` must be writable.
 */
enum HpsStatus hps_case_to_json(const struct HpsCase *handle, char **out);

/**
 * Number of asserted facts in a case, or 0 for null.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
size_t hps_case_fact_count(const struct HpsCase *handle);

/**
 * # Safety
 * `handle` must be null or a handle from this library that has not been freed.
 */
void hps_case_free(struct HpsCase *handle);

/**
 * Normalized structure-mapping similarity of two cases, in [0, 1].
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum HpsStatus hps_match_score(const struct HpsCase *base,
                               const struct HpsCase *target,
                               double *out);

/**
 * Encodes a row-major 8-bit grayscale image (bright ink on dark) into a
 * shape case with default settings.
 *
 * # Safety
 * `pixels` must point to `width * height` bytes; `out` must be writable.
 */
enum HpsStatus hps_encode_gray(const uint8_t *pixels,
                               size_t width,
                               size_t height,
                               struct HpsCase **out);

/**
 * Loads a pool directory written by `hps train` or `hps eval`. `config` may
 * be null for default encoding settings, or name the experiment config the
 * pools were trained with.
 *
 * # Safety
 * `dir` must be a NUL-terminated path; `config` null or NUL-terminated;
 * `out` writable.
 */
enum HpsStatus hps_pools_load_dir(const char *dir, const char *config, struct HpsPools **out);

/**
 * Classifies a grayscale image. On success `*label_out` receives the
 * concept label (free with `hps_string_free`).
 *
 * # Safety
 * `pools` must be live; `pixels` must point to `width * height` bytes;
 * `label_out` writable.
 */
enum HpsStatus hps_pools_classify(const struct HpsPools *pools,
                                  const uint8_t *pixels,
                                  size_t width,
                                  size_t height,
                                  char **label_out);

/**
 * # Safety
 * `pools` must be null or a handle from this library that has not been freed.
 */
void hps_pools_free(struct HpsPools *pools);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HPS_H */
