#ifndef ZIRHO_H
#define ZIRHO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ZirhoBoundsMethod {
  ZIRHO_BOUNDS_METHOD_CLOSED_FORM = 0,
  ZIRHO_BOUNDS_METHOD_ORACLE = 1,
} ZirhoBoundsMethod;

typedef enum ZirhoCopula {
  ZIRHO_COPULA_FRECHET = 0,
  ZIRHO_COPULA_UPPER_BOUND_M = 1,
  ZIRHO_COPULA_LOWER_BOUND_W = 2,
  ZIRHO_COPULA_INDEPENDENCE = 3,
} ZirhoCopula;

/**
 * Status codes. `ZIRHO_STATUS_OK` is zero; everything else is an error.
 */
typedef enum ZirhoStatus {
  ZIRHO_STATUS_OK = 0,
  ZIRHO_STATUS_NULL_POINTER = 1,
  ZIRHO_STATUS_INVALID_SPEC = 2,
  ZIRHO_STATUS_INVALID_INPUT = 3,
  ZIRHO_STATUS_INSUFFICIENT_DATA = 4,
  ZIRHO_STATUS_DEGENERATE = 5,
  ZIRHO_STATUS_TRUNCATION_TOO_COARSE = 6,
  ZIRHO_STATUS_INTERNAL = 7,
  ZIRHO_STATUS_PANIC = 8,
} ZirhoStatus;

/**
 * Opaque joint pmf.
 */
typedef struct ZirhoJoint ZirhoJoint;

/**
 * Opaque discrete margin.
 */
typedef struct ZirhoMargin ZirhoMargin;

/**
 * Opaque paired sample.
 */
typedef struct ZirhoSample ZirhoSample;

typedef struct ZirhoBounds {
  double rho_min;
  double rho_max;
  double rho_s11_max;
  double rho_s11_min;
  double zero_mass_x;
  double zero_mass_y;
} ZirhoBounds;

/**
 * Estimator output. `degenerate` counts components that were replaced by 0.
 */
typedef struct ZirhoEstimate {
  double rho_a;
  double p00;
  double p01;
  double p10;
  double p11;
  double rho_s11;
  double rho_s10;
  double rho_s01;
  double rho_s00;
  size_t n11;
  size_t n10;
  size_t n01;
  size_t n00;
  size_t degenerate;
} ZirhoEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t zirho_last_error(char *buf, size_t len);

/**
 * Zero-inflated Poisson margin truncated at tail mass `eps`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum ZirhoStatus zirho_margin_zip(double lambda, double p, double eps, struct ZirhoMargin **out);

/**
 * Margin from an explicit pmf with strictly increasing support.
 *
 * # Safety
 * `support` and `probs` must point to `len` readable elements; `out` must
 * be a valid pointer to a handle slot.
 */
enum ZirhoStatus zirho_margin_from_pmf(const uint64_t *support,
                                       const double *probs,
                                       size_t len,
                                       struct ZirhoMargin **out);

/**
 * Total probability at zero.
 *
 * # Safety
 * `m` must be a live margin handle or null.
 */
enum ZirhoStatus zirho_margin_mass_at_zero(const struct ZirhoMargin *m, double *out);

/**
 * # Safety
 * `m` must be null or a handle from a margin constructor, freed once.
 */
void zirho_margin_free(struct ZirhoMargin *m);

/**
 * Joint pmf of two margins under a copula. `alpha` is read only for
 * `Frechet`.
 *
 * # Safety
 * `f`, `g` must be live margin handles; `out` a valid handle slot.
 */
enum ZirhoStatus zirho_joint_new(const struct ZirhoMargin *f,
                                 const struct ZirhoMargin *g,
                                 enum ZirhoCopula copula,
                                 double alpha,
                                 struct ZirhoJoint **out);

/**
 * # Safety
 * `j` must be null or a handle from `zirho_joint_new`, freed once.
 */
void zirho_joint_free(struct ZirhoJoint *j);

/**
 * Exact rho of a joint pmf.
 *
 * # Safety
 * `j` must be a live joint handle; `out` writable.
 */
enum ZirhoStatus zirho_spearman_exact(const struct ZirhoJoint *j, double *out);

/**
 * Rho reassembled from the zero-inflation decomposition.
 *
 * # Safety
 * `j` must be a live joint handle; `out` writable.
 */
enum ZirhoStatus zirho_decomposition_eval(const struct ZirhoJoint *j, double *out);

/**
 * Attainable bounds of rho for two margins.
 *
 * # Safety
 * `f`, `g` must be live margin handles; `out` writable.
 */
enum ZirhoStatus zirho_bounds(const struct ZirhoMargin *f,
                              const struct ZirhoMargin *g,
                              enum ZirhoBoundsMethod method,
                              struct ZirhoBounds *out);

/**
 * Paired sample from two coordinate arrays of equal length.
 *
 * # Safety
 * `xs`, `ys` must point to `len` readable elements; `out` a valid handle
 * slot.
 */
enum ZirhoStatus zirho_sample_new(const uint64_t *xs,
                                  const uint64_t *ys,
                                  size_t len,
                                  struct ZirhoSample **out);

/**
 * # Safety
 * `s` must be null or a handle from `zirho_sample_new`, freed once.
 */
void zirho_sample_free(struct ZirhoSample *s);

/**
 * Decomposition estimator on a sample.
 *
 * # Safety
 * `s` must be a live sample handle; `out` writable.
 */
enum ZirhoStatus zirho_estimate(const struct ZirhoSample *s, struct ZirhoEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZIRHO_H */
