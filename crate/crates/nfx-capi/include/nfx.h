/* C interface to the nfx measurement library. */

#ifndef NFX_H
#define NFX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of a call. Anything but `Ok` leaves a message for
 * [`nfx_last_error`].
 */
typedef enum NfxStatus {
  NfxStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  NfxStatus_NullPointer = 1,
  /**
   * An argument failed validation (unknown token, out-of-range index,
   * rejected synthesis parameters).
   */
  NfxStatus_InvalidArg = 2,
  /**
   * A string argument was not valid UTF-8.
   */
  NfxStatus_Utf8 = 3,
  /**
   * The operating system reported an I/O failure.
   */
  NfxStatus_Io = 4,
  /**
   * Input text could not be parsed into series data.
   */
  NfxStatus_Parse = 5,
  /**
   * The measurement could not be produced from otherwise valid input.
   */
  NfxStatus_Compute = 6,
} NfxStatus;

/**
 * Classification of one day.
 */
typedef enum NfxDayClass {
  NfxDayClass_Positive = 0,
  NfxDayClass_Reverse = 1,
  NfxDayClass_NoEffect = 2,
  NfxDayClass_Undefined = 3,
} NfxDayClass;

/**
 * Opaque classified-days handle.
 */
typedef struct NfxDays NfxDays;

/**
 * Opaque daily series handle.
 */
typedef struct NfxSeries NfxSeries;

/**
 * One classified day, flattened for C consumption. `delta_v`/`delta_u` are
 * NaN on undefined days.
 */
typedef struct NfxDay {
  int32_t year;
  uint32_t month;
  uint32_t day;
  double delta_v;
  double delta_u;
  enum NfxDayClass class_;
} NfxDay;

/**
 * Aggregate measurements for one asset and proxy pair. Relative strengths
 * are NaN when no day carried the corresponding effect.
 */
typedef struct NfxAggregateRow {
  uint64_t total_days;
  uint64_t undefined_days;
  uint64_t pos_days;
  uint64_t rev_days;
  double pos_strength_sum;
  double rev_strength_sum;
  double pos_prevalence;
  double rev_prevalence;
  double pos_relative_strength;
  double rev_relative_strength;
} NfxAggregateRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message raised on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *nfx_last_error(void);

/**
 * Load a daily series from a metrics CSV file (`time` column plus any of
 * PriceUSD, TxTfrValAdjUSD, AdrBalCnt, AdrActCnt, 6MAdrActCnt). The whole
 * file range is kept. `fill_gaps` inserts all-missing rows for interior
 * date gaps instead of failing.
 *
 * # Safety
 * `path` and `asset_id` point to NUL-terminated strings; `out` points to
 * writable storage for one pointer.
 */
enum NfxStatus nfx_series_load_csv(const char *path,
                                   const char *asset_id,
                                   bool fill_gaps,
                                   struct NfxSeries **out);

/**
 * Generate a synthetic daily series. `law` is one of
 * linear | nlogn | metcalfe | exponential | noise.
 *
 * # Safety
 * `law` points to a NUL-terminated string; `out` points to writable storage
 * for one pointer.
 */
enum NfxStatus nfx_series_synth(const char *law,
                                uint32_t days,
                                double u0,
                                double growth,
                                double noise_sigma,
                                uint64_t seed,
                                struct NfxSeries **out);

/**
 * Number of days in the series; 0 for null.
 *
 * # Safety
 * `series` is null or a live series handle.
 */
uintptr_t nfx_series_len(const struct NfxSeries *series);

/**
 * Release a series handle. Null is a no-op.
 *
 * # Safety
 * `series` must have come from this library and not been freed before.
 */
void nfx_series_free(struct NfxSeries *series);

/**
 * Classify every consecutive day pair of `series` under a proxy pair given
 * as a value:user token (price|txval, balcnt|act6m), e.g. "price:balcnt".
 *
 * # Safety
 * `series` is a live series handle; `pair` points to a NUL-terminated
 * string; `out` points to writable storage for one pointer.
 */
enum NfxStatus nfx_classify(const struct NfxSeries *series, const char *pair, struct NfxDays **out);

/**
 * Number of classified days; 0 for null.
 *
 * # Safety
 * `days` is null or a live handle.
 */
uintptr_t nfx_days_len(const struct NfxDays *days);

/**
 * Copy the classified day at `index` into `*out`.
 *
 * # Safety
 * `days` is a live handle; `out` points to writable storage for one
 * `NfxDay`.
 */
enum NfxStatus nfx_days_get(const struct NfxDays *days, uintptr_t index, struct NfxDay *out);

/**
 * Release a classified-days handle. Null is a no-op.
 *
 * # Safety
 * `days` must have come from this library and not been freed before.
 */
void nfx_days_free(struct NfxDays *days);

/**
 * Aggregate classified days into summary measurements. `pair` is the
 * value:user token the days were classified under; `magnitude_rule` is
 * abs-delta-v or abs-excess. Absent relative strengths come back as NaN.
 *
 * # Safety
 * `days` is a live handle; the string arguments point to NUL-terminated
 * strings; `out` points to writable storage for one row.
 */
enum NfxStatus nfx_aggregate(const struct NfxDays *days,
                             const char *asset_id,
                             const char *pair,
                             const char *magnitude_rule,
                             struct NfxAggregateRow *out);

/**
 * Pearson correlation of two equal-length arrays.
 *
 * # Safety
 * `x` and `y` point to `len` readable doubles each; `out` points to
 * writable storage for one double.
 */
enum NfxStatus nfx_pearson(const double *x, const double *y, uintptr_t len, double *out);

/**
 * Render classified days as a stem-plot SVG document. `title` may be null
 * for no title. The returned string must be released with
 * [`nfx_string_free`].
 *
 * # Safety
 * `days` is a live handle; `title` is null or a NUL-terminated string;
 * `out` points to writable storage for one pointer.
 */
enum NfxStatus nfx_render_stemplot(const struct NfxDays *days, const char *title, char **out);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must have come from this library and not been freed before.
 */
void nfx_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NFX_H */
