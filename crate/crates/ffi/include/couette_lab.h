#ifndef COUETTE_LAB_H
#define COUETTE_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CouetteStatus {
  COUETTE_STATUS_OK = 0,
  COUETTE_STATUS_NULL_POINTER = 1,
  COUETTE_STATUS_INVALID_PARAMETER = 2,
  COUETTE_STATUS_GRID_INCOMPATIBLE = 3,
  COUETTE_STATUS_CONFIG = 4,
  COUETTE_STATUS_IO = 5,
  COUETTE_STATUS_FORMAT = 6,
  COUETTE_STATUS_NUMERICAL = 7,
  COUETTE_STATUS_PANIC = 8,
} CouetteStatus;

/**
 * Spectral field on a sheared-frame grid.
 */
typedef struct CouetteField CouetteField;

/**
 * Nonlinear simulation state.
 */
typedef struct CouetteSimulation CouetteSimulation;

/**
 * Cached multiplier evaluator.
 */
typedef struct CouetteWeights CouetteWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
uintptr_t couette_last_error(char *buf, uintptr_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *couette_version(void);

/**
 * `int_{t0}^{t1} k^2 + (eta - k s)^2 ds`, the exponent of the viscous factor.
 */
double couette_viscous_integral(int64_t k, double eta, double t0, double t1);

/**
 * Zero field on an `nz x nv` grid with vertical period `2 pi lv`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum CouetteStatus couette_field_new(uintptr_t nz,
                                     uintptr_t nv,
                                     double lv,
                                     struct CouetteField **out);

/**
 * # Safety
 * `f` must be null or a handle from this library, not used afterwards.
 */
void couette_field_free(struct CouetteField *f);

/**
 * Set mode `(k, j)` and its conjugate partner so the field stays real.
 *
 * # Safety
 * `f` must be a live field handle.
 */
enum CouetteStatus couette_field_set_mode(struct CouetteField *f,
                                          int64_t k,
                                          int64_t j,
                                          double re,
                                          double im);

/**
 * # Safety
 * `f` must be a live field handle; `re` and `im` valid for writing.
 */
enum CouetteStatus couette_field_get_mode(const struct CouetteField *f,
                                          int64_t k,
                                          int64_t j,
                                          double *re,
                                          double *im);

/**
 * # Safety
 * `f` must be a live field handle; `out` valid for writing.
 */
enum CouetteStatus couette_field_l2_norm(const struct CouetteField *f, double *out);

/**
 * Exact linear evolution in the sheared frame to time `t`; writes a new field.
 *
 * # Safety
 * `f` must be a live field handle; `out` valid for writing one pointer.
 */
enum CouetteStatus couette_linear_evolve(const struct CouetteField *f,
                                         double t,
                                         double nu,
                                         struct CouetteField **out);

/**
 * Simulation from a JSON configuration string.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` valid for writing one pointer.
 */
enum CouetteStatus couette_sim_new(const char *json, struct CouetteSimulation **out);

/**
 * # Safety
 * `s` must be null or a handle from this library, not used afterwards.
 */
void couette_sim_free(struct CouetteSimulation *s);

/**
 * # Safety
 * `s` must be a live simulation handle.
 */
enum CouetteStatus couette_sim_advance_to(struct CouetteSimulation *s, double t);

/**
 * Current time, step count and `||P_!= omega||`.
 *
 * # Safety
 * `s` must be a live simulation handle; outputs may be null to skip them.
 */
enum CouetteStatus couette_sim_status(const struct CouetteSimulation *s,
                                      double *t,
                                      uint64_t *steps,
                                      double *l2_nonzero);

/**
 * Copy of the current vorticity.
 *
 * # Safety
 * `s` must be a live simulation handle; `out` valid for writing one pointer.
 */
enum CouetteStatus couette_sim_field(const struct CouetteSimulation *s, struct CouetteField **out);

/**
 * Multiplier evaluator with standard constants for `(beta, nu)`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum CouetteStatus couette_weights_new(double beta, double nu, struct CouetteWeights **out);

/**
 * # Safety
 * `w` must be null or a handle from this library, not used afterwards.
 */
void couette_weights_free(struct CouetteWeights *w);

/**
 * `log A_k(t, eta)`.
 *
 * # Safety
 * `w` must be a live weights handle; `out` valid for writing.
 */
enum CouetteStatus couette_weights_log_a(const struct CouetteWeights *w,
                                         double t,
                                         int64_t k,
                                         double eta,
                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COUETTE_LAB_H */
