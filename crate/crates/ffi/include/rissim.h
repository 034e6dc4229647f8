#ifndef RISSIM_H
#define RISSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RissimStatus {
  RISSIM_STATUS_OK = 0,
  RISSIM_STATUS_INVALID_ARGUMENT = 1,
  RISSIM_STATUS_NULL_POINTER = 2,
  RISSIM_STATUS_CONFIG_ERROR = 3,
  RISSIM_STATUS_RUNTIME_ERROR = 4,
  RISSIM_STATUS_DOMAIN_ERROR = 5,
  RISSIM_STATUS_PANIC = 6,
} RissimStatus;

typedef enum RissimMetric {
  RISSIM_METRIC_COUPLING_LOSS_DB = 0,
  RISSIM_METRIC_SINR_DB = 1,
  RISSIM_METRIC_SNR_DB = 2,
  RISSIM_METRIC_SPECTRAL_EFFICIENCY = 3,
} RissimMetric;

/**
 * Results of a finished campaign.
 */
typedef struct RissimCampaign RissimCampaign;

/**
 * Simulation configuration plus the strategies and thread count to run.
 */
typedef struct RissimConfig RissimConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rissim_version(void);

/**
 * Message of the last failed call on this thread, empty after a success.
 * Valid until the next `rissim_*` call on the same thread.
 */
const char *rissim_last_error(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum RissimStatus rissim_config_default(struct RissimConfig **out);

/**
 * Parses TOML text. Missing keys take their defaults.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum RissimStatus rissim_config_from_toml(const char *toml, struct RissimConfig **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RissimStatus rissim_config_load(const char *path, struct RissimConfig **out);

/**
 * # Safety
 * `cfg` must come from a `rissim_config_*` constructor or be null.
 */
void rissim_config_free(struct RissimConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum RissimStatus rissim_config_set_seed(struct RissimConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum RissimStatus rissim_config_set_drops(struct RissimConfig *cfg, size_t drops);

/**
 * Worker threads for [`rissim_campaign_run`]; 0 uses all cores.
 *
 * # Safety
 * `cfg` must be a live config handle.
 */
enum RissimStatus rissim_config_set_threads(struct RissimConfig *cfg, size_t threads);

/**
 * Comma-separated strategy list, e.g. `"no_ris,discrete(16),ideal"`.
 * Without a call the config's own strategy is run.
 *
 * # Safety
 * `cfg` must be a live config handle; `list` a NUL-terminated string.
 */
enum RissimStatus rissim_config_set_strategies(struct RissimConfig *cfg, const char *list);

/**
 * Runs every drop of the campaign.
 *
 * # Safety
 * `cfg` must be a live config handle; `out` must be writable.
 */
enum RissimStatus rissim_campaign_run(const struct RissimConfig *cfg, struct RissimCampaign **out);

/**
 * # Safety
 * `c` must come from [`rissim_campaign_run`] or be null.
 */
void rissim_campaign_free(struct RissimCampaign *c);

/**
 * # Safety
 * `c` must be a live campaign handle; `out` must be writable.
 */
enum RissimStatus rissim_campaign_strategy_count(const struct RissimCampaign *c, size_t *out);

/**
 * Copies the label of strategy `index` (e.g. `discrete_16`) into `buf`,
 * NUL-terminated. `needed` receives the required size including the NUL.
 *
 * # Safety
 * `buf` must hold `len` bytes or be null with `len == 0`.
 */
enum RissimStatus rissim_campaign_strategy_label(const struct RissimCampaign *c,
                                                 size_t index,
                                                 char *buf,
                                                 size_t len,
                                                 size_t *needed);

/**
 * # Safety
 * `c` must be a live campaign handle; `out` must be writable.
 */
enum RissimStatus rissim_campaign_user_count(const struct RissimCampaign *c,
                                             size_t strategy,
                                             size_t *out);

/**
 * Per-user values of `metric` in drop order. Pass a null `buf` to query
 * the count through `written`.
 *
 * # Safety
 * `buf` must hold `len` doubles or be null.
 */
enum RissimStatus rissim_campaign_metric_values(const struct RissimCampaign *c,
                                                size_t strategy,
                                                enum RissimMetric metric,
                                                double *buf,
                                                size_t len,
                                                size_t *written);

/**
 * Empirical percentile, `p` in [0, 100].
 *
 * # Safety
 * `c` must be a live campaign handle; `out` must be writable.
 */
enum RissimStatus rissim_campaign_percentile(const struct RissimCampaign *c,
                                             size_t strategy,
                                             enum RissimMetric metric,
                                             double p,
                                             double *out);

/**
 * Writes CDF tables, `summary.json` and `manifest.json` into `dir`.
 *
 * # Safety
 * `c` must be a live campaign handle; `dir` a NUL-terminated string.
 */
enum RissimStatus rissim_campaign_write_results(const struct RissimCampaign *c, const char *dir);

/**
 * # Safety
 * `out` must be writable.
 */
enum RissimStatus rissim_sinc_factor(size_t levels, double *out);

/**
 * Rate with co-phased cascade terms, bits/s/Hz.
 *
 * # Safety
 * `mags` must hold `n` doubles; `out` must be writable.
 */
enum RissimStatus rissim_rate_ideal(double direct_mag,
                                    const double *cascade_mags,
                                    size_t n,
                                    double tx_power,
                                    double noise_power,
                                    double *out);

/**
 * Large-N rate with `levels` phase levels; the cascade mean is taken
 * from the supplied magnitudes.
 *
 * # Safety
 * `mags` must hold `n >= 1` doubles; `out` must be writable.
 */
enum RissimStatus rissim_rate_discrete_asymptotic(double direct_mag,
                                                  const double *cascade_mags,
                                                  size_t n,
                                                  double tx_power,
                                                  double noise_power,
                                                  size_t levels,
                                                  double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum RissimStatus rissim_rate_no_ris(double direct_mag,
                                     double tx_power,
                                     double noise_power,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISSIM_H */
