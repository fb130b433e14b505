#ifndef QEST_H
#define QEST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QestStatus {
  QEST_STATUS_OK = 0,
  QEST_STATUS_NULL_POINTER = 1,
  QEST_STATUS_INVALID_ARGUMENT = 2,
  QEST_STATUS_INVALID_THETA = 3,
  QEST_STATUS_INVALID_WEIGHT = 4,
  QEST_STATUS_NUMERICAL = 5,
  QEST_STATUS_INFEASIBLE = 6,
  QEST_STATUS_INDEX_OUT_OF_RANGE = 7,
  QEST_STATUS_BUFFER_TOO_SMALL = 8,
  QEST_STATUS_PANIC = 9,
} QestStatus;

typedef enum QestStrategy {
  QEST_STRATEGY_SINGLE_COPY_OPTIMAL = 0,
  QEST_STRATEGY_TWO_STEP = 1,
  QEST_STRATEGY_ADAPTIVE = 2,
} QestStrategy;

// A validated model point.
typedef struct QestModel QestModel;

// The optimal measurement with its locally unbiased estimator.
typedef struct QestPovm QestPovm;

typedef struct QestBounds {
  double sld_cr;
  double rld_cr;
  // Nagaoka bound for k = 2, HGM bound for k = 3.
  double nagaoka_hgm;
  double holevo;
} QestBounds;

typedef struct QestSimSummary {
  double weighted_mse;
  double n_times_weighted_mse;
  double std_error;
  uint64_t flagged_trials;
} QestSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a model point. `theta1` must be nonzero and `theta1² + theta2² < 1`.
//
// # Safety
// `out` must be a valid pointer; on success it receives a handle to release with [`qest_model_free`].
enum QestStatus qest_model_new(double theta1,
                               double theta2,
                               double theta3,
                               struct QestModel **out);

// # Safety
// `m` must come from [`qest_model_new`] and not be used afterwards. Null is ignored.
void qest_model_free(struct QestModel *m);

// Bounds for `k` parameters. `weight` holds `k*k` row-major entries; for `k = 3`
// a positive `w3` instead selects the block weight built from the first 4 entries.
//
// # Safety
// `weight` must point to `k*k` doubles (4 when `w3 > 0`), `out` to a writable struct.
enum QestStatus qest_bounds(const struct QestModel *m,
                            uintptr_t k,
                            const double *weight,
                            double w3,
                            struct QestBounds *out);

// Optimal measurement for the 2×2 weight `w2` (row-major) at the model point.
//
// # Safety
// `w2` must point to 4 doubles and `out` to a writable handle slot.
enum QestStatus qest_optimal_povm_new(const struct QestModel *m,
                                      const double *w2,
                                      struct QestPovm **out);

// # Safety
// `p` must come from [`qest_optimal_povm_new`] and not be used afterwards. Null is ignored.
void qest_povm_free(struct QestPovm *p);

// Number of POVM elements.
//
// # Safety
// `p` must be a live handle and `out` writable.
enum QestStatus qest_povm_len(const struct QestPovm *p, uintptr_t *out);

// Element `i` as 8 doubles: `re, im` for entries `(0,0), (0,1), (1,0), (1,1)`.
//
// # Safety
// `p` must be a live handle and `matrix` must point to 8 writable doubles.
enum QestStatus qest_povm_element(const struct QestPovm *p, uintptr_t i, double *matrix);

// Estimate `(theta1, theta2)` attached to element `i`.
//
// # Safety
// `p` must be a live handle and `estimate` must point to 2 writable doubles.
enum QestStatus qest_povm_estimate(const struct QestPovm *p, uintptr_t i, double *estimate);

// Membership of the 2×2 candidate `v` (row-major) in the attainable region.
// `member` and `boundary` receive 0 or 1.
//
// # Safety
// `v` must point to 4 doubles; `member` and `boundary` must be writable.
enum QestStatus qest_region_d(const struct QestModel *m,
                              const double *v,
                              int *member,
                              int *boundary);

// Monte-Carlo MSE of a strategy at the model point (the true state), 2×2 weight `w2`.
//
// # Safety
// `w2` must point to 4 doubles and `out` must be writable.
enum QestStatus qest_simulate(const struct QestModel *m,
                              enum QestStrategy strategy,
                              const double *w2,
                              uint64_t n,
                              uint64_t trials,
                              uint64_t seed,
                              struct QestSimSummary *out);

// Copies the calling thread's last error message, NUL-terminated, into `buf`.
// Writes the required size including the terminator to `needed` when non-null.
//
// # Safety
// `buf` must point to `len` writable bytes (or be null with `len == 0`).
enum QestStatus qest_last_error_message(char *buf, uintptr_t len, uintptr_t *needed);

// Library version as a static NUL-terminated string.
const char *qest_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QEST_H */
