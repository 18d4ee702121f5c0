#ifndef NILCIRCLE_H
#define NILCIRCLE_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  NC_STATUS_OK = 0,
  NC_STATUS_INVALID_ARGUMENT = 1,
  NC_STATUS_INFEASIBLE = 2,
  NC_STATUS_OVERFLOW = 3,
  NC_STATUS_NULL_POINTER = 4,
  NC_STATUS_BUFFER_TOO_SMALL = 5,
  NC_STATUS_INTERNAL = 6,
} NcStatus;

/**
 * A point of `G0(d)` with integer coordinates.
 */
typedef struct NcElement NcElement;

/**
 * A finite nilsystem with permutation generators.
 */
typedef struct NcSystem NcSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nc_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 if there is none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t nc_last_error_message(char *buf, size_t len);

/**
 * Creates an element of `G0(d)` from its `len` coordinates, non-central first.
 *
 * # Safety
 * `coords` must point to `len` values; `out` must be writable.
 */
NcStatus nc_element_new(size_t d, const int64_t *coords, size_t len, NcElement **out_el);

/**
 * Releases an element; null is ignored.
 *
 * # Safety
 * `el` must come from this library and not be used afterwards.
 */
void nc_element_free(NcElement *el);

/**
 * Number of coordinates `|Y_d|` of an element.
 *
 * # Safety
 * `el` must be a live handle or null (returns 0).
 */
size_t nc_element_len(const NcElement *el);

/**
 * Writes the coordinates into `buf`.
 *
 * # Safety
 * `el` must be a live handle; `buf` must hold `len` values.
 */
NcStatus nc_element_coords(const NcElement *el, int64_t *buf, size_t len);

/**
 * `a * b` in `G0(d)`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
NcStatus nc_element_multiply(const NcElement *a, const NcElement *b, NcElement **out_el);

/**
 * `a^{-1}`.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
NcStatus nc_element_inverse(const NcElement *a, NcElement **out_el);

/**
 * Complete Gauss sum `S(a/q)` for the `m` numerators in `a`.
 *
 * # Safety
 * `a` must hold `m` values; `re` and `im` must be writable.
 */
NcStatus nc_gauss_sum(const int64_t *a, size_t m, int64_t q, double *re, double *im);

/**
 * Nilpotent Gauss sum `G(a/q)` of length `r` on `G0(d)`; `tilde` selects the
 * `D~` form, `brute` the exhaustive evaluation.
 *
 * # Safety
 * `a` must hold `len` values; `re` and `im` must be writable.
 */
NcStatus nc_nil_gauss_sum(size_t d,
                          const int64_t *a,
                          size_t len,
                          int64_t q,
                          size_t r,
                          bool tilde,
                          bool brute,
                          double *re,
                          double *im);

/**
 * `V^rho` of a real sequence; `rho = INFINITY` gives the jump supremum.
 *
 * # Safety
 * `values` must hold `n` values; `result` must be writable.
 */
NcStatus nc_variation(const double *values, size_t n, double rho, double *result);

/**
 * `#{y in H_Q : q_beta(x . y^{-1}) < r}` for the `|Y_d|` weights `beta` and centre `x`.
 *
 * # Safety
 * `beta` and `center` must hold `len` values; `count` must be writable.
 */
NcStatus nc_ball_count(size_t d,
                       int64_t q,
                       const double *beta,
                       const double *center,
                       size_t len,
                       double r,
                       uint64_t *count);

/**
 * The cyclic system `x -> x + 1 mod m`.
 *
 * # Safety
 * `out` must be writable.
 */
NcStatus nc_system_cyclic(size_t m, NcSystem **out_sys);

/**
 * `J_Q = G0(d) / H_Q` with the `d` generator translations.
 *
 * # Safety
 * `out` must be writable.
 */
NcStatus nc_system_heisenberg_quotient(size_t d, int64_t q, NcSystem **out_sys);

/**
 * Releases a system; null is ignored.
 *
 * # Safety
 * `sys` must come from this library and not be used afterwards.
 */
void nc_system_free(NcSystem *sys);

/**
 * Number of points of the system, 0 for null.
 *
 * # Safety
 * `sys` must be a live handle or null.
 */
size_t nc_system_len(const NcSystem *sys);

/**
 * Number of generators, 0 for null.
 *
 * # Safety
 * `sys` must be a live handle or null.
 */
size_t nc_system_arity(const NcSystem *sys);

/**
 * Rough average `A_N f` with `P_j(n) = n^j`, written into `result` (one value per point).
 *
 * # Safety
 * `f` and `result` must hold `len` values, `len` the number of points.
 */
NcStatus nc_system_average(const NcSystem *sys,
                           const double *f,
                           size_t len,
                           uint64_t n,
                           double *result);

/**
 * Checks `prod T_i^{m_i} prod T_j^{n_j} = prod T_j^{m_j+n_j} prod_{i<j} S_{ji}^{m_j n_i}`
 * for exponent vectors of length `arity`; the answer goes to `holds`.
 *
 * # Safety
 * `m` and `n` must hold `len` values; `holds` must be writable.
 */
NcStatus nc_system_commutator_check(const NcSystem *sys,
                                    const int64_t *m,
                                    const int64_t *n,
                                    size_t len,
                                    bool *holds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NILCIRCLE_H */
