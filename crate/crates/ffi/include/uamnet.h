#ifndef UAMNET_H
#define UAMNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for every FFI call.
 */
typedef enum UamnetStatus {
  UamnetStatus_Ok = 0,
  UamnetStatus_NullArgument = 1,
  UamnetStatus_InvalidUtf8 = 2,
  UamnetStatus_InvalidConfig = 3,
  UamnetStatus_ComputeFailed = 4,
  UamnetStatus_BufferTooSmall = 5,
} UamnetStatus;

/**
 * Opaque scenario handle.
 */
typedef struct UamnetScenario UamnetScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated).
 * `len` carries the buffer capacity in and the required size (including the
 * NUL) out.
 *
 * # Safety
 * `len` must be a valid pointer; `buf` must point to at least `*len` bytes
 * or be null for a pure size query.
 */
enum UamnetStatus uamnet_last_error(char *buf, uintptr_t *len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *uamnet_version(void);

/**
 * Create a scenario with the built-in desk-scale defaults.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum UamnetStatus uamnet_scenario_default(struct UamnetScenario **out);

/**
 * Parse a scenario from TOML text. Validation failures list every violated
 * invariant in the error message.
 *
 * # Safety
 * `toml` must be a valid NUL-terminated string; `out` a valid pointer.
 */
enum UamnetStatus uamnet_scenario_from_toml(const char *toml, struct UamnetScenario **out);

/**
 * Destroy a scenario handle. Null is accepted and ignored.
 *
 * # Safety
 * `h` must be a handle from this library, not yet freed.
 */
void uamnet_scenario_free(struct UamnetScenario *h);

/**
 * Override the root seed.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum UamnetStatus uamnet_scenario_set_seed(struct UamnetScenario *h, uint64_t seed);

/**
 * Override the Monte Carlo drop count.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum UamnetStatus uamnet_scenario_set_drops(struct UamnetScenario *h, uint64_t drops);

/**
 * Serialize the effective scenario to TOML. Two-call sizing like
 * `uamnet_last_error`.
 *
 * # Safety
 * `h` must be a live handle; `len` valid; `buf` null or `*len` bytes.
 */
enum UamnetStatus uamnet_scenario_to_toml(const struct UamnetScenario *h,
                                          char *buf,
                                          uintptr_t *len);

/**
 * Closed-form coverage probability at an SIR threshold in dB.
 *
 * # Safety
 * `h` must be a live handle; `out` valid.
 */
enum UamnetStatus uamnet_coverage_probability(const struct UamnetScenario *h,
                                              double threshold_db,
                                              double *out);

/**
 * Monte Carlo coverage at several thresholds (dB in, probabilities out,
 * same length).
 *
 * # Safety
 * `h` live; `thresholds_db` and `out` must point to `n` doubles each.
 */
enum UamnetStatus uamnet_coverage_mc(const struct UamnetScenario *h,
                                     const double *thresholds_db,
                                     uintptr_t n,
                                     double *out);

/**
 * Optimal elevation tilt in degrees for one vehicle height.
 *
 * # Safety
 * `h` live; `out` valid.
 */
enum UamnetStatus uamnet_optimal_tilt_deg(const struct UamnetScenario *h,
                                          double height_m,
                                          double *out);

/**
 * Line-of-sight probability for a link of 2D length `r_m` to a vehicle at
 * `height_m`.
 *
 * # Safety
 * `h` live; `out` valid.
 */
enum UamnetStatus uamnet_los_probability(const struct UamnetScenario *h,
                                         double r_m,
                                         double height_m,
                                         double *out);

/**
 * Vehicles one sector can serve at a reliability target in (0, 1).
 *
 * # Safety
 * `h` live; `out` valid.
 */
enum UamnetStatus uamnet_supportable_uams(const struct UamnetScenario *h,
                                          double reliability_target,
                                          double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* UAMNET_H */
