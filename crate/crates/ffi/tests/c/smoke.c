#include <math.h>
#include <stdio.h>
#include "dualband.h"

#define CHECK(cond, msg)                                \
  do {                                                  \
    if (!(cond)) {                                      \
      const char *e = dualband_last_error();            \
      fprintf(stderr, "%s: %s\n", msg, e ? e : "");     \
      return 1;                                         \
    }                                                   \
  } while (0)

int main(void) {
  DbSpace *sp = NULL;
  CHECK(dualband_space_new("mono(2)", "1", "mono(3)", &sp) == DB_OK, "space");
  size_t d = 0;
  CHECK(dualband_space_dim(sp, &d) == DB_OK && d == 4, "dim");

  double m[32];
  size_t need = 0;
  CHECK(dualband_operator_matrix(sp, "z", m, 2, &need) == DB_BUFFER_TOO_SMALL && need == 32, "too small");
  CHECK(dualband_operator_matrix(sp, "z", m, 32, &need) == DB_OK, "matrix");

  DbEigenvalue ev[4];
  size_t n = 0;
  CHECK(dualband_point_spectrum(sp, ev, 4, &n) == DB_OK && n == 1, "spectrum");
  CHECK(fabs(ev[0].re) < 1e-12 && ev[0].ker_dim == 2, "eigenvalue");

  double norm = 0;
  CHECK(dualband_hankel_norm(sp, "mono(3)", &norm) == DB_OK && fabs(norm - 1.0) < 1e-12, "norm");

  CHECK(dualband_space_new("mono(2)", "1", "mono(2)", &sp) == DB_INPUT_ERROR, "degenerate");
  CHECK(dualband_last_error() != NULL, "message");
  dualband_space_free(sp);
  printf("ok\n");
  return 0;
}
