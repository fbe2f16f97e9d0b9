#ifndef KERRSLAB_H
#define KERRSLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum KsScheme {
  KS_SCHEME_PICARD = 0,
  KS_SCHEME_COUPLED = 1,
} KsScheme;

typedef enum KsStatus {
  KS_STATUS_OK = 0,
  KS_STATUS_NULL_POINTER = 1,
  KS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The solution handle is still produced and must be freed.
   */
  KS_STATUS_NOT_CONVERGED = 3,
  KS_STATUS_DIVERGED = 4,
  KS_STATUS_SINGULAR = 5,
  KS_STATUS_CONFIG = 6,
  KS_STATUS_PANIC = 7,
} KsStatus;

typedef struct KsProblem KsProblem;

typedef struct KsSolution KsSolution;

/**
 * Scalar results of a solve.
 */
typedef struct KsSummary {
  double a_scat_re;
  double a_scat_im;
  double b_scat_re;
  double b_scat_im;
  double reflectance;
  double transmittance;
  double deficit;
  double residual;
  size_t iterations;
  bool converged;
} KsSummary;

/**
 * Sufficient-condition outcome. `real_satisfied` is -1 for complex profiles;
 * `t_factor` is NaN when no rate is guaranteed.
 */
typedef struct KsCheckSummary {
  bool any_satisfied;
  int32_t real_satisfied;
  bool complex_satisfied;
  bool weak_satisfied;
  double t_factor;
} KsCheckSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library.
 */
const char *ks_last_error(void);

const char *ks_version(void);

/**
 * Creates a problem with vacuum permittivity and 1025 grid nodes.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum KsStatus ks_problem_new(double kappa,
                             double phi_angle,
                             double delta,
                             double alpha,
                             double a_inc_re,
                             double a_inc_im,
                             struct KsProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from [`ks_problem_new`] not yet freed.
 */
void ks_problem_free(struct KsProblem *problem);

/**
 * # Safety
 * `problem` must be a live handle.
 */
enum KsStatus ks_problem_set_permittivity_constant(struct KsProblem *problem, double re, double im);

/**
 * Samples on a uniform closed grid over the layer. `im` may be null for a
 * real profile.
 *
 * # Safety
 * `problem` must be a live handle; `re` (and `im` when non-null) must point
 * to `len` readable doubles.
 */
enum KsStatus ks_problem_set_permittivity_samples(struct KsProblem *problem,
                                                  const double *re,
                                                  const double *im,
                                                  size_t len);

/**
 * `n` must be odd and at least 3.
 *
 * # Safety
 * `problem` must be a live handle.
 */
enum KsStatus ks_problem_set_grid(struct KsProblem *problem, size_t n);

/**
 * # Safety
 * `problem` must be a live handle.
 */
enum KsStatus ks_problem_set_solver(struct KsProblem *problem,
                                    enum KsScheme scheme,
                                    double tol,
                                    size_t max_iters);

/**
 * Solves the problem. On [`KsStatus::Ok`] and [`KsStatus::NotConverged`]
 * `*out` receives a solution handle.
 *
 * # Safety
 * `problem` must be a live handle and `out` valid for one write.
 */
enum KsStatus ks_solve(const struct KsProblem *problem, struct KsSolution **out);

/**
 * # Safety
 * `solution` must be null or a handle from [`ks_solve`] not yet freed.
 */
void ks_solution_free(struct KsSolution *solution);

/**
 * Number of field samples, or 0 for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t ks_solution_len(const struct KsSolution *solution);

/**
 * Copies nodes and field samples; any output pointer may be null.
 *
 * # Safety
 * `solution` must be a live handle; non-null outputs must hold `len` doubles,
 * with `len` equal to [`ks_solution_len`].
 */
enum KsStatus ks_solution_field(const struct KsSolution *solution,
                                double *z,
                                double *re,
                                double *im,
                                size_t len);

/**
 * # Safety
 * `solution` must be a live handle and `out` valid for one write.
 */
enum KsStatus ks_solution_summary(const struct KsSolution *solution, struct KsSummary *out);

/**
 * # Safety
 * `problem` must be a live handle and `out` valid for one write.
 */
enum KsStatus ks_check(const struct KsProblem *problem, struct KsCheckSummary *out);

/**
 * Solves a JSON run configuration and returns the solution document as a
 * JSON string, to be released with [`ks_string_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out_json` valid for one
 * write.
 */
enum KsStatus ks_run_config_json(const char *config_json, char **out_json);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void ks_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KERRSLAB_H */
