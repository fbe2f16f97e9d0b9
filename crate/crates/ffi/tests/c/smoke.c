#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "kerrslab.h"

#define CHECK(expr)                                                        \
  do {                                                                     \
    KsStatus s_ = (expr);                                                  \
    if (s_ != KS_STATUS_OK) {                                              \
      const char *m_ = ks_last_error();                                    \
      fprintf(stderr, "%s -> %d: %s\n", #expr, (int)s_, m_ ? m_ : "");     \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  KsProblem *p = NULL;
  KsSolution *s = NULL;
  KsSummary sum;
  KsCheckSummary chk;

  CHECK(ks_problem_new(1.0, 0.0, 0.25 / M_PI, 0.05, 1.0, 0.0, &p));
  CHECK(ks_problem_set_permittivity_constant(p, 1.5, 0.0));
  CHECK(ks_problem_set_grid(p, 513));
  CHECK(ks_check(p, &chk));
  CHECK(ks_solve(p, &s));
  CHECK(ks_solution_summary(s, &sum));

  size_t n = ks_solution_len(s);
  double *re = malloc(n * sizeof(double));
  double *im = malloc(n * sizeof(double));
  CHECK(ks_solution_field(s, NULL, re, im, n));
  double top = hypot(re[n - 1] - 1.0 - sum.a_scat_re, im[n - 1] - sum.a_scat_im);

  if (ks_problem_set_grid(p, 4) != KS_STATUS_INVALID_ARGUMENT || ks_last_error() == NULL) {
    return 2;
  }
  printf("%zu %d %.12f %.12f %.3e %d %.6f %.3e\n", n, (int)sum.converged, sum.reflectance,
         sum.transmittance, sum.deficit, (int)chk.any_satisfied, chk.t_factor, top);

  free(re);
  free(im);
  ks_solution_free(s);
  ks_problem_free(p);
  return 0;
}
