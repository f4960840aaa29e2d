#ifndef AQF_H
#define AQF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AqfStatus {
  AQF_STATUS_OK = 0,
  AQF_STATUS_NULL_POINTER = 1,
  AQF_STATUS_INVALID_ARGUMENT = 2,
  AQF_STATUS_IO = 3,
  /**
   * Malformed CSV, model file or breakpoint table.
   */
  AQF_STATUS_PARSE = 4,
  /**
   * Cleaning or analysis left too little data.
   */
  AQF_STATUS_INSUFFICIENT_DATA = 5,
  /**
   * Non-finite values or a singular regression.
   */
  AQF_STATUS_NUMERIC = 6,
  AQF_STATUS_PANIC = 99,
} AqfStatus;

/**
 * Parsed or cleaned observations.
 */
typedef struct AqfFrame AqfFrame;

/**
 * A trained forecaster with its scaler.
 */
typedef struct AqfModel AqfModel;

typedef struct AqfCleanReport {
  size_t input_rows;
  size_t kept;
  size_t missing;
  size_t out_of_range;
  size_t duplicate;
} AqfCleanReport;

typedef struct AqfAqi {
  int32_t sub_index_pm25;
  int32_t sub_index_pm10;
  int32_t composite;
  /**
   * 0 = PM2.5, 1 = PM10.
   */
  int32_t dominant;
  /**
   * 0 Good, 1 Moderate, 2 Unhealthy for Sensitive Groups, 3 Unhealthy,
   * 4 Very Unhealthy, 5 Hazardous.
   */
  int32_t category;
  bool above_scale;
} AqfAqi;

typedef struct AqfAdfResult {
  double statistic;
  double p_value;
  size_t lags_used;
  size_t n_obs;
  bool stationary;
} AqfAdfResult;

typedef struct AqfMetrics {
  double mse;
  double rmse;
  double mae;
  /**
   * NaN when the truths are constant.
   */
  double r2;
} AqfMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *aqf_version(void);

/**
 * Message for the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on this thread.
 */
const char *aqf_last_error_message(void);

/**
 * Parses CSV text into a new frame.
 *
 * # Safety
 * `csv` must be a NUL-terminated string; `out` must be writable.
 */
enum AqfStatus aqf_frame_from_csv(const char *csv, struct AqfFrame **out);

/**
 * Reads and parses a CSV file into a new frame.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum AqfStatus aqf_frame_from_path(const char *path, struct AqfFrame **out);

/**
 * Cleans `frame` into a new frame. `report` may be NULL.
 *
 * # Safety
 * `frame` must be a live handle; `out` must be writable.
 */
enum AqfStatus aqf_frame_clean(const struct AqfFrame *frame,
                               struct AqfFrame **out,
                               struct AqfCleanReport *report);

/**
 * Number of rows, or 0 for NULL.
 *
 * # Safety
 * `frame` must be NULL or a live handle.
 */
size_t aqf_frame_len(const struct AqfFrame *frame);

/**
 * Copies column `name` into `out`, which must hold `aqf_frame_len` values.
 *
 * # Safety
 * `frame` must be a live handle, `name` NUL-terminated, and `out` must
 * point to `capacity` writable doubles.
 */
enum AqfStatus aqf_frame_column(const struct AqfFrame *frame,
                                const char *name,
                                double *out,
                                size_t capacity);

/**
 * # Safety
 * `frame` must be NULL or a handle not yet freed.
 */
void aqf_frame_free(struct AqfFrame *frame);

/**
 * Loads a model file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum AqfStatus aqf_model_load(const char *path, struct AqfModel **out);

/**
 * Rows of history a forecast needs, or 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t aqf_model_lookback(const struct AqfModel *model);

/**
 * Forecasts `steps` hours past the end of `frame`. Each output array must
 * hold `steps` values; `aqi` may be NULL. `trailing_24h` selects the AQI
 * basis (trailing 24-hour mean, otherwise the hourly value).
 *
 * # Safety
 * `model` and `frame` must be live handles; non-NULL output pointers must
 * point to `steps` writable elements.
 */
enum AqfStatus aqf_model_forecast(const struct AqfModel *model,
                                  const struct AqfFrame *frame,
                                  size_t steps,
                                  bool trailing_24h,
                                  double *pm25,
                                  double *pm10,
                                  int32_t *aqi);

/**
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void aqf_model_free(struct AqfModel *model);

/**
 * Composite AQI on the bundled EPA table, concentrations in µg/m³.
 *
 * # Safety
 * `out` must be writable.
 */
enum AqfStatus aqf_aqi_composite(double pm25, double pm10, struct AqfAqi *out);

/**
 * Augmented Dickey-Fuller test with a constant and AIC lag selection.
 * A negative `max_lag` selects the default maximum lag.
 *
 * # Safety
 * `series` must point to `len` readable doubles; `out` must be writable.
 */
enum AqfStatus aqf_adf_test(const double *series,
                            size_t len,
                            int64_t max_lag,
                            double threshold,
                            struct AqfAdfResult *out);

/**
 * MSE, RMSE, MAE and R² of `predictions` against `truths`.
 *
 * # Safety
 * Both arrays must hold `len` readable doubles; `out` must be writable.
 */
enum AqfStatus aqf_evaluate(const double *predictions,
                            const double *truths,
                            size_t len,
                            struct AqfMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AQF_H */
