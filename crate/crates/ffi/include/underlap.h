#ifndef UNDERLAP_H
#define UNDERLAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Status code returned by every fallible function.
typedef enum UnlStatus {
  UNL_STATUS_OK = 0,
  UNL_STATUS_NULL_POINTER = 1,
  UNL_STATUS_INVALID_UTF8 = 2,
  UNL_STATUS_INVALID_JSON = 3,
  UNL_STATUS_SHAPE = 4,
  UNL_STATUS_INVALID_ARGUMENT = 5,
  UNL_STATUS_NUMERIC = 6,
  UNL_STATUS_CAPACITY = 7,
  UNL_STATUS_PRECONDITION = 8,
  UNL_STATUS_IO = 9,
  UNL_STATUS_PANIC = 10,
  UNL_STATUS_OTHER = 11,
} UnlStatus;

// Opaque density handle. Create with [`unl_density_from_json`], release with
// [`unl_density_free`].
typedef struct UnlDensity UnlDensity;

// Importance-sampling estimate returned by [`unl_estimate`].
typedef struct UnlEstimateC {
  double value;
  size_t k;
  size_t m;
  double weight_mean;
  double weight_max;
  double ess;
  // `value (k - value) / m`.
  double variance_bound;
} UnlEstimateC;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null after a
// success. The pointer stays valid until the next call on the same thread.
const char *unl_last_error(void);

// Library version as a static NUL-terminated string.
const char *unl_version(void);

// Parses a density from NUL-terminated JSON into `*out`.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a writable pointer.
enum UnlStatus unl_density_from_json(const char *json, struct UnlDensity **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `density` must come from [`unl_density_from_json`] and not be freed twice.
void unl_density_free(struct UnlDensity *density);

// Writes the number of continuous and categorical variables.
//
// # Safety
// `density` must be a live handle; the out pointers must be writable.
enum UnlStatus unl_density_dims(const struct UnlDensity *density,
                                size_t *n_continuous,
                                size_t *n_categorical);

// Log density at one point given as continuous and categorical parts.
//
// # Safety
// `continuous` must hold `n_continuous` values and `categorical`
// `n_categorical` values (either may be null when its length is zero).
enum UnlStatus unl_density_log_density(const struct UnlDensity *density,
                                       const double *continuous,
                                       size_t n_continuous,
                                       const size_t *categorical,
                                       size_t n_categorical,
                                       double *out);

// Draws `n` points, written row-major into `continuous` (`n * n_continuous`
// values) and `categorical` (`n * n_categorical` values).
//
// # Safety
// The output buffers must have the sizes above; either may be null when its
// dimension is zero.
enum UnlStatus unl_density_sample(const struct UnlDensity *density,
                                  size_t n,
                                  uint64_t seed,
                                  double *continuous,
                                  size_t *categorical);

// Importance-sampling UNL estimate of `k` groups from `m` mixture draws.
//
// # Safety
// `groups` must point to `k` live handles and `out` must be writable.
enum UnlStatus unl_estimate(const struct UnlDensity *const *groups,
                            size_t k,
                            size_t m,
                            uint64_t seed,
                            struct UnlEstimateC *out);

// Exact UNL of categorical groups by state enumeration.
//
// # Safety
// `groups` must point to `k` live handles and `out` must be writable.
enum UnlStatus unl_exact(const struct UnlDensity *const *groups, size_t k, double *out);

// `unl (k - unl) / m`, the variance bound of the estimator.
//
// # Safety
// `out` must be writable.
enum UnlStatus unl_variance_bound(size_t k, double unl, size_t m, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNDERLAP_H */
