#ifndef XFERSCAT_H
#define XFERSCAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum XsStatus {
  XS_STATUS_OK = 0,
  XS_STATUS_NULL_POINTER = 1,
  XS_STATUS_INVALID_PARAMETER = 2,
  XS_STATUS_DISTRIBUTIONAL_VARIANT = 3,
  XS_STATUS_COMB_REQUIRES_LATTICE = 4,
  XS_STATUS_GRAZING_INCIDENCE = 5,
  XS_STATUS_SINGULAR_OPERATOR = 6,
  XS_STATUS_NO_CONVERGENCE = 7,
  XS_STATUS_DIMENSION_MISMATCH = 8,
  XS_STATUS_GRID_MISMATCH = 9,
  XS_STATUS_UNSUPPORTED_FAMILY = 10,
  XS_STATUS_IO = 11,
  XS_STATUS_JSON = 12,
  XS_STATUS_INVALID_UTF8 = 13,
  XS_STATUS_BUFFER_TOO_SMALL = 14,
  XS_STATUS_PANIC = 15,
} XsStatus;

typedef enum XsSide {
  XS_SIDE_LEFT = 0,
  XS_SIDE_RIGHT = 1,
} XsSide;

/**
 * Opaque handle to a 2D potential.
 */
typedef struct XsPotential2D XsPotential2D;

typedef struct XsComplex {
  double re;
  double im;
} XsComplex;

/**
 * `slices = 0` selects the automatic initial count.
 */
typedef struct XsEngineOptions {
  size_t nodes;
  size_t slices;
  double tol;
  uint32_t max_doublings;
} XsEngineOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Engine and report schema versions; static storage, never freed.
 */
const char *xs_version(void);

/**
 * Message of the last failed call on this thread; valid until the next
 * call into the library from this thread.
 */
const char *xs_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void xs_string_free(char *s);

/**
 * Parses a potential from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum XsStatus xs_potential2d_from_json(const char *json, struct XsPotential2D **out);

/**
 * # Safety
 * `p` must be null or a handle from [`xs_potential2d_from_json`], freed once.
 */
void xs_potential2d_free(struct XsPotential2D *p);

/**
 * `ṽ(x, Ky)`.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum XsStatus xs_potential2d_fourier_y(const struct XsPotential2D *p,
                                       double x,
                                       double ky,
                                       struct XsComplex *out);

/**
 * Scattering amplitudes at `n` output angles, written to `out_f[0..n]`.
 * A null `opts` uses 64 nodes and the default tolerance.
 *
 * # Safety
 * `thetas` and `out_f` must point to `n` elements; `opts` may be null.
 */
enum XsStatus xs_amplitude(const struct XsPotential2D *p,
                           double k,
                           enum XsSide side,
                           double theta0,
                           const double *thetas,
                           size_t n,
                           const struct XsEngineOptions *opts,
                           struct XsComplex *out_f);

/**
 * First Born amplitude.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum XsStatus xs_born_2d(const struct XsPotential2D *p,
                         double k,
                         enum XsSide side,
                         double theta0,
                         double theta,
                         struct XsComplex *out);

/**
 * Diffraction orders of a δ-comb. `*count` receives the number of orders;
 * when it exceeds `capacity` nothing else is written and
 * `BufferTooSmall` is returned.
 *
 * # Safety
 * `orders`, `r`, `t` must point to `capacity` elements; `count` must be
 * writable.
 */
enum XsStatus xs_comb_orders(const struct XsPotential2D *p,
                             double k,
                             double theta0,
                             enum XsSide side,
                             size_t capacity,
                             int64_t *orders,
                             struct XsComplex *r,
                             struct XsComplex *t,
                             size_t *count);

/**
 * Runs `experiment` (`invisibility`, `equivalence`, `comb` or `3d`) on a
 * run configuration in the CLI's JSON format. Relative potential paths
 * resolve against the working directory. `*pass` is 1 when the report
 * passes.
 *
 * # Safety
 * String arguments must be NUL-terminated; `report` and `pass` writable.
 */
enum XsStatus xs_run_experiment_json(const char *config_json,
                                     const char *experiment,
                                     char **report,
                                     int32_t *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XFERSCAT_H */
