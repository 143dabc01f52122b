#ifndef CADE_H
#define CADE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CadeKind {
  CADE_KIND_LINEAR = 0,
  CADE_KIND_NONLINEAR = 1,
  CADE_KIND_DOUBLE = 2,
  CADE_KIND_TWO_PHASE = 3,
} CadeKind;

typedef enum CadeStatus {
  CADE_STATUS_OK = 0,
  CADE_STATUS_NULL_POINTER = 1,
  CADE_STATUS_INVALID_ARGUMENT = 2,
  CADE_STATUS_UNKNOWN_PRESET = 3,
  CADE_STATUS_NO_EXACT_SOLUTION = 4,
  CADE_STATUS_BUFFER_TOO_SMALL = 5,
  CADE_STATUS_SOLVE_FAILED = 6,
  CADE_STATUS_PANIC = 7,
} CadeStatus;

/**
 * Opaque problem handle.
 */
typedef struct CadeProblem CadeProblem;

/**
 * Opaque result handle.
 */
typedef struct CadeReport CadeReport;

/**
 * Solver settings; fill with [`cade_options_default`] and adjust.
 */
typedef struct CadeOptions {
  double dt;
  double alpha;
  double gamma;
  double tol;
  double eps1;
  size_t max_outer;
  size_t max_fixed_point;
  /**
   * 2 or 4.
   */
  uint32_t sweeps;
} CadeOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cade_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until
 * the next failing call on the same thread.
 */
const char *cade_last_error(void);

/**
 * Creates a named benchmark problem with `cells` cells per axis.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CadeStatus cade_problem_preset(const char *name, size_t cells, struct CadeProblem **out);

/**
 * Creates a problem on `[extent[0], extent[1]]` (times `[extent[2],
 * extent[3]]` in 2D) with `cells` cells per axis. Arrays hold one value per
 * node in row-major order (first index slowest). `psi`, `phi`, `f` and `g`
 * may be NULL (no lower bound, no upper bound, zero source, zero boundary
 * data); only the boundary entries of `g` are read. `mu1`, `mu2` are used
 * by the two-phase kind only.
 *
 * # Safety
 * `extent` must hold `2 * dim` values and every non-NULL array must hold
 * as many values as the grid has nodes.
 */
enum CadeStatus cade_problem_new(enum CadeKind kind,
                                 uint32_t dim,
                                 const double *extent,
                                 size_t cells,
                                 const double *psi,
                                 const double *phi,
                                 const double *f,
                                 const double *g,
                                 double mu1,
                                 double mu2,
                                 struct CadeProblem **out);

/**
 * # Safety
 * `problem` must come from a `cade_problem_*` constructor and not be used
 * afterwards. NULL is ignored.
 */
void cade_problem_free(struct CadeProblem *problem);

/**
 * Number of grid nodes, or 0 for NULL.
 *
 * # Safety
 * `problem` must be NULL or a live handle.
 */
size_t cade_problem_node_count(const struct CadeProblem *problem);

/**
 * Grid spacing, or NaN for NULL.
 *
 * # Safety
 * `problem` must be NULL or a live handle.
 */
double cade_problem_dx(const struct CadeProblem *problem);

/**
 * Published defaults for this problem (time step rule, penalty, tolerance).
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
enum CadeStatus cade_options_default(const struct CadeProblem *problem, struct CadeOptions *out);

/**
 * Runs the solver matching the problem kind. Hitting `max_outer` is not
 * an error: check [`cade_report_converged`].
 *
 * # Safety
 * `problem` must be a live handle, `options` and `out` valid pointers.
 */
enum CadeStatus cade_solve(const struct CadeProblem *problem,
                           const struct CadeOptions *options,
                           struct CadeReport **out);

/**
 * # Safety
 * `report` must come from [`cade_solve`] and not be used afterwards.
 * NULL is ignored.
 */
void cade_report_free(struct CadeReport *report);

/**
 * # Safety
 * `report` must be NULL or a live handle.
 */
size_t cade_report_iterations(const struct CadeReport *report);

/**
 * # Safety
 * `report` must be NULL or a live handle.
 */
bool cade_report_converged(const struct CadeReport *report);

/**
 * Copies the final solution (one value per node) into `buf`.
 *
 * # Safety
 * `report` must be a live handle and `buf` writable for `len` values.
 */
enum CadeStatus cade_report_solution(const struct CadeReport *report, double *buf, size_t len);

/**
 * Copies `||u^{n+1} - u^n||_inf` per iteration; needs
 * [`cade_report_iterations`] slots.
 *
 * # Safety
 * `report` must be a live handle and `buf` writable for `len` values.
 */
enum CadeStatus cade_report_diff_history(const struct CadeReport *report, double *buf, size_t len);

/**
 * Two-phase 1D interfaces. Writes the number of points to `count`; copies
 * them when `buf` is non-NULL and large enough.
 *
 * # Safety
 * `report` must be a live handle, `count` valid, `buf` NULL or writable
 * for `len` values.
 */
enum CadeStatus cade_report_free_boundary(const struct CadeReport *report,
                                          double *buf,
                                          size_t len,
                                          size_t *count);

/**
 * L2 and sup errors of the report against the problem's exact solution.
 *
 * # Safety
 * Handles must be live, `l2` and `linf` valid pointers.
 */
enum CadeStatus cade_report_errors(const struct CadeReport *report,
                                   const struct CadeProblem *problem,
                                   double *l2,
                                   double *linf);

/**
 * Damping factor of the explicit sweep for `-eta1 lap + eta2` in `dim`
 * dimensions.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CadeStatus cade_zeta(double eta1,
                          double eta2,
                          double dt,
                          double dx,
                          uint32_t dim,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CADE_H */
