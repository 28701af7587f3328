/* C interface of the cell-free massive MIMO uplink simulator. */

#pragma once

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from cfmimo-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible C-ABI call.
 */
typedef enum CfmStatus {
  CFM_STATUS_OK = 0,
  CFM_STATUS_NULL_ARGUMENT = 1,
  CFM_STATUS_CONFIG_ERROR = 2,
  CFM_STATUS_NUMERICAL_ERROR = 3,
  CFM_STATUS_IO_ERROR = 4,
} CfmStatus;

/**
 * Opaque simulation configuration.
 */
typedef struct CfmConfig CfmConfig;

/**
 * Opaque experiment result.
 */
typedef struct CfmResult CfmResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread. Never null.
 */
const char *cfm_last_error(void);

/**
 * New configuration with the built-in defaults. Free with
 * [`cfm_config_free`].
 */
struct CfmConfig *cfm_config_default(void);

/**
 * Load a configuration file (`key = value` lines, `#` comments).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must point to
 * writable storage for one pointer.
 */
enum CfmStatus cfm_config_load(const char *path, struct CfmConfig **out);

/**
 * Set one configuration field by its config-file key, e.g.
 * `cfm_config_set(cfg, "m", "50")`. Unknown keys are rejected.
 *
 * # Safety
 * `config` must be a live handle from this library; `key` and `value` must
 * be valid NUL-terminated strings.
 */
enum CfmStatus cfm_config_set(struct CfmConfig *config, const char *key, const char *value);

/**
 * # Safety
 * `config` must be a handle from this library, not yet freed; null is a
 * no-op.
 */
void cfm_config_free(struct CfmConfig *config);

/**
 * Run the experiment at the configuration's single (L, K) point. Free the
 * result with [`cfm_result_free`].
 *
 * # Safety
 * `config` must be a live handle; `out` must point to writable storage for
 * one pointer.
 */
enum CfmStatus cfm_run(const struct CfmConfig *config, struct CfmResult **out);

/**
 * Write `sumrate_vs_L.csv`, `rate_cdf.csv` and `summary.json` into
 * `out_dir` (created if missing).
 *
 * # Safety
 * `result` must be a live handle; `out_dir` a valid NUL-terminated string.
 */
enum CfmStatus cfm_result_write(const struct CfmResult *result, const char *out_dir);

/**
 * The summary.json payload as a newly allocated string; free it with
 * [`cfm_string_free`]. Null only if `result` is null.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
char *cfm_result_summary_json(const struct CfmResult *result);

/**
 * # Safety
 * `result` must be a handle from this library, not yet freed; null is a
 * no-op.
 */
void cfm_result_free(struct CfmResult *result);

/**
 * # Safety
 * `s` must come from [`cfm_result_summary_json`] and not be freed twice;
 * null is a no-op.
 */
void cfm_string_free(char *s);

/**
 * Maximum-weight one-to-one assignment of `rows` users to `cols` items
 * (rows ≤ cols). `weights` is row-major with `rows * cols` entries;
 * `assignment_out` receives one column index per row; `objective_out` may
 * be null.
 *
 * # Safety
 * `weights` must point to `rows * cols` doubles and `assignment_out` to
 * `rows` writable `size_t` slots.
 */
enum CfmStatus cfm_hungarian_max(const double *weights,
                                 size_t rows,
                                 size_t cols,
                                 size_t *assignment_out,
                                 double *objective_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
