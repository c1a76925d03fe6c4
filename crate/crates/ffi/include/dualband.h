#ifndef DUALBAND_H
#define DUALBAND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum DbStatus {
  DB_OK = 0,
  // A required pointer argument was null.
  DB_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  DB_INVALID_UTF8 = 2,
  // A symbol expression or scenario failed to parse.
  DB_PARSE_ERROR = 3,
  // Inputs were rejected (invalid space, eigenvalue where a resolvent was asked, ...).
  DB_INPUT_ERROR = 4,
  // A computed residual exceeded its bound.
  DB_CONTRACT_VIOLATION = 5,
  // The caller's buffer is too small; the required length was written.
  DB_BUFFER_TOO_SMALL = 6,
  // An internal panic was caught.
  DB_PANIC = 7,
} DbStatus;

// A validated dual-band space.
typedef struct DbSpace DbSpace;

// One eigenvalue of the shift.
typedef struct DbEigenvalue {
  double re;
  double im;
  size_t ker_dim;
  size_t algebraic_multiplicity;
  double residual;
} DbEigenvalue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the next
// call into this library from the same thread.
const char *dualband_last_error(void);

// Build a space from theta, phi, psi written in the symbol grammar.
//
// # Safety
// String arguments must be nul-terminated; `out` must be writable.
enum DbStatus dualband_space_new(const char *theta,
                                 const char *phi,
                                 const char *psi,
                                 struct DbSpace **out);

// Build a free-symbol space from theta, A+ and A-.
//
// # Safety
// String arguments must be nul-terminated; `out` must be writable.
enum DbStatus dualband_space_free_symbol(const char *theta,
                                         const char *aplus,
                                         const char *aminus,
                                         struct DbSpace **out);

// Release a space. Null is ignored.
//
// # Safety
// `space` must be null or a handle from this library not yet freed.
void dualband_space_free(struct DbSpace *space);

// Dimension 2n of the space.
//
// # Safety
// `space` must be a live handle and `out` writable.
enum DbStatus dualband_space_dim(const struct DbSpace *space, size_t *out);

// Matrix of T^M_g, row-major, as d*d interleaved complex values (2*d*d doubles).
// `len` is the buffer length in doubles; on DB_BUFFER_TOO_SMALL the required
// length is written to `needed` when it is not null.
//
// # Safety
// `g` must be nul-terminated; `buf` must hold `len` doubles.
enum DbStatus dualband_operator_matrix(const struct DbSpace *space,
                                       const char *g,
                                       double *buf,
                                       size_t len,
                                       size_t *needed);

// Eigenvalues of T^M_z from the determinant formulas, validated by eigenvectors.
// Writes at most `cap` entries and the total count to `count`.
//
// # Safety
// `buf` must hold `cap` entries; `count` must be writable.
enum DbStatus dualband_point_spectrum(const struct DbSpace *space,
                                      struct DbEigenvalue *buf,
                                      size_t cap,
                                      size_t *count);

// Delta at lambda in the closed disc, or Delta tilde outside it.
//
// # Safety
// `out` must hold two doubles.
enum DbStatus dualband_determinant(const struct DbSpace *space, double re, double im, double *out);

// ||T^M_g|| through the block Hankel matrix; g must give an analytic block symbol.
//
// # Safety
// `g` must be nul-terminated; `out` writable.
enum DbStatus dualband_hankel_norm(const struct DbSpace *space, const char *g, double *out);

// Solve (T^M_z - lambda) f = h through the Wiener-Hopf factorization.
// `h` and `f` hold 2*dim doubles; `relative_difference` receives the
// distance to a direct solve.
//
// # Safety
// Buffers must hold 2*dim doubles, dim being the space dimension.
enum DbStatus dualband_resolvent(const struct DbSpace *space,
                                 double re,
                                 double im,
                                 const double *h,
                                 double *f,
                                 size_t dim,
                                 double *relative_difference);

// Run a scenario given as text. `report_json` receives a string owned by the
// library (release with `dualband_string_free`) and `exit_code` the CLI exit
// code (0 ok, 2 contract violation, 3 input error). Timings are omitted.
//
// # Safety
// `scenario` must be nul-terminated; output pointers writable.
enum DbStatus dualband_run_scenario(const char *scenario, char **report_json, int32_t *exit_code);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void dualband_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUALBAND_H */
