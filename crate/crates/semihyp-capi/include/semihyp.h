/* C interface for the semihyp solver suite. */

#ifndef SEMIHYP_H
#define SEMIHYP_H

#pragma once

/* Generated by cbindgen from semihyp-capi; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible entry point.
typedef enum ShStatus {
  // Success; out parameters are valid.
  SH_STATUS_OK = 0,
  // A required pointer argument was NULL.
  SH_STATUS_NULL_ARGUMENT = 1,
  // The problem description was rejected (sizes, parse, variables).
  SH_STATUS_BAD_PROBLEM = 2,
  // The march failed (stalled iteration, non-finite values, bad grid).
  SH_STATUS_SOLVE_FAILED = 3,
  // A numeric argument was out of range.
  SH_STATUS_BAD_INPUT = 4,
  // A string argument was not valid UTF-8.
  SH_STATUS_UTF8 = 5,
  // An internal panic was caught at the boundary.
  SH_STATUS_PANIC = 6,
} ShStatus;

// Verdict of sh_run_blowup().
typedef enum ShBlowupStatus {
  // The march reached the requested horizon below the cap.
  SH_BLOWUP_STATUS_COMPLETED = 0,
  // The sup-norm cap was exceeded or the slab widths collapsed.
  SH_BLOWUP_STATUS_DETECTED = 1,
  // The iteration stopped without a verdict.
  SH_BLOWUP_STATUS_INCONCLUSIVE = 2,
} ShBlowupStatus;

// Opaque solution handle.
typedef struct ShField ShField;

// Opaque problem handle.
typedef struct ShProblem ShProblem;

// Plain-data result of sh_run_blowup().
typedef struct ShBlowupResult {
  enum ShBlowupStatus status;
  // Last committed time.
  double reached_t;
  // Extrapolated blow-up time; NaN when not estimated.
  double t_star;
  // Largest |u| seen.
  double peak;
  // Committed slab count.
  size_t slabs;
} ShBlowupResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Crate version as a static NUL-terminated string.
const char *sh_version(void);

// Description of the last failure on this thread. Never NULL; empty before
// the first failure. Valid until the next failing call on the same thread.
const char *sh_last_error_message(void);

// Build a problem from `n` expressions per family. `lambda` are speeds in
// (x, t); `f` interior terms in (x, t, u1..un); `phi` initial data in (x);
// `h` boundary terms in (t, v1..vn). Components 1..k must have negative
// speeds, the rest positive. On success `*out` owns the handle.
//
// # Safety
// The array arguments must point to `n` valid NUL-terminated strings each,
// and `out` must be a valid location to store a pointer.
enum ShStatus sh_problem_parse(size_t n,
                               size_t k,
                               const char *const *lambda,
                               const char *const *f,
                               const char *const *phi,
                               const char *const *h,
                               struct ShProblem **out);

// # Safety
// `p` must be a pointer returned by sh_problem_parse() that has not been
// freed, or NULL.
void sh_problem_free(struct ShProblem *p);

// Number of components n.
//
// # Safety
// `p` must be a live problem handle or NULL (returns 0).
size_t sh_problem_num_components(const struct ShProblem *p);

// Check the fixed-sign convention and symbolic differentiability over
// [0,1] x [0,t_max]. Writes 1 to `*pass` when every check holds.
//
// # Safety
// `p` must be a live problem handle; `pass` must be writable.
enum ShStatus sh_problem_validate(const struct ShProblem *p, double t_max, int *pass);

// March the problem to `t_final` on `nx` spatial intervals. Pass a nonzero
// `derivatives` to also march the x-derivative system. On success `*out`
// owns the solution handle.
//
// # Safety
// `p` must be a live problem handle and `out` a valid location to store a
// pointer.
enum ShStatus sh_solve(const struct ShProblem *p,
                       size_t nx,
                       double t_final,
                       int derivatives,
                       struct ShField **out);

// # Safety
// `f` must be a pointer returned by sh_solve() that has not been freed,
// or NULL.
void sh_field_free(struct ShField *f);

// Number of stored time levels (level 0 is the initial data).
//
// # Safety
// `f` must be a live field handle or NULL (returns 0).
size_t sh_field_num_levels(const struct ShField *f);

// Number of spatial nodes (nx + 1).
//
// # Safety
// `f` must be a live field handle or NULL (returns 0).
size_t sh_field_num_nodes(const struct ShField *f);

// Number of solution components.
//
// # Safety
// `f` must be a live field handle or NULL (returns 0).
size_t sh_field_num_components(const struct ShField *f);

// Time of one level; NaN when out of range.
//
// # Safety
// `f` must be a live field handle or NULL.
double sh_field_time(const struct ShField *f, size_t level);

// Coordinate of one node; NaN when out of range.
//
// # Safety
// `f` must be a live field handle or NULL.
double sh_field_x(const struct ShField *f, size_t node);

// One sampled value u_comp(x_node, t_level); components are 0-based here.
// NaN when any index is out of range.
//
// # Safety
// `f` must be a live field handle or NULL.
double sh_field_value(const struct ShField *f, size_t level, size_t comp, size_t node);

// du/dx at one sample; NaN unless the solve requested derivatives.
//
// # Safety
// `f` must be a live field handle or NULL.
double sh_field_dx_value(const struct ShField *f, size_t level, size_t comp, size_t node);

// du/dt at one sample; NaN unless the solve requested derivatives.
//
// # Safety
// `f` must be a live field handle or NULL.
double sh_field_dt_value(const struct ShField *f, size_t level, size_t comp, size_t node);

// Largest |u| over the whole grid; NaN on NULL.
//
// # Safety
// `f` must be a live field handle or NULL.
double sh_field_sup_abs(const struct ShField *f);

// Write the wide-format CSV (one row per node and level) to `path`.
//
// # Safety
// `f` must be a live field handle; `path` a valid NUL-terminated string.
enum ShStatus sh_field_write_csv(const struct ShField *f, const char *path);

// March with dynamic range re-sizing until |u| exceeds `u_max`, the slab
// widths collapse, or `t_max` is reached. Fills `*result` on success.
//
// # Safety
// `p` must be a live problem handle and `result` writable.
enum ShStatus sh_run_blowup(const struct ShProblem *p,
                            double u_max,
                            double t_max,
                            size_t nx,
                            struct ShBlowupResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMIHYP_H */
