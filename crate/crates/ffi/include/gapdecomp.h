#ifndef GAPDECOMP_H
#define GAPDECOMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum GdStatus {
  GD_STATUS_OK = 0,
  GD_STATUS_INVALID_ARGUMENT = 1,
  GD_STATUS_CONFIG_ERROR = 2,
  GD_STATUS_DATA_ERROR = 3,
  GD_STATUS_ESTIMATION_ERROR = 4,
  GD_STATUS_PANIC = 5,
} GdStatus;

typedef enum GdFormat {
  GD_FORMAT_TEXT = 0,
  GD_FORMAT_CSV = 1,
  GD_FORMAT_JSON = 2,
} GdFormat;

// A fitted probit model (opaque).
typedef struct GdProbit GdProbit;

// Output of a configured run (opaque).
typedef struct GdReport GdReport;

// Headline numbers of one decomposition. Absent standard errors are NaN.
typedef struct GdDecompositionSummary {
  double total_gap;
  double total_gap_se;
  double explained_total;
  double explained_total_se;
  double unexplained_total;
  size_t n_reference;
  size_t n_comparison;
  size_t n_blocks;
} GdDecompositionSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a
// successful call. Valid until the next call into the library.
const char *gd_last_error(void);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void gd_string_free(char *s);

// Runs the configuration given as TOML text. Relative data paths resolve
// against `base_dir` (may be NULL for the working directory).
//
// # Safety
// `config_toml` must be a NUL-terminated string, `base_dir` NULL or a
// NUL-terminated string, and `out` a valid pointer.
enum GdStatus gd_run(const char *config_toml, const char *base_dir, struct GdReport **out);

// Dry-run checks. Writes the number of problems to `count` and, when
// `diagnostics_json` is not NULL, a JSON array describing them.
//
// # Safety
// String arguments as for [`gd_run`]; `count` must be valid and
// `diagnostics_json` NULL or valid.
enum GdStatus gd_validate(const char *config_toml,
                          const char *base_dir,
                          size_t *count,
                          char **diagnostics_json);

// Renders the report as text, CSV or JSON into a new string.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum GdStatus gd_report_render(const struct GdReport *report, enum GdFormat format, char **out);

// Number of decompositions (outcomes times comparison groups).
//
// # Safety
// `report` must be NULL or a live handle.
size_t gd_report_decomposition_count(const struct GdReport *report);

// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum GdStatus gd_report_decomposition(const struct GdReport *report,
                                      size_t index,
                                      struct GdDecompositionSummary *out);

// # Safety
// `report` must be NULL or a handle from [`gd_run`], not yet freed.
void gd_report_free(struct GdReport *report);

// Fits a weighted probit by maximum likelihood. `x` is row-major `n x k`
// without an intercept (one is added as the first coefficient); `y` holds
// 0/1 outcomes; `w` may be NULL for unit weights.
//
// # Safety
// `x` must point to `n * k` doubles, `y` and (non-NULL) `w` to `n`
// doubles, and `out` must be valid.
enum GdStatus gd_probit_fit(const double *x,
                            size_t n,
                            size_t k,
                            const double *y,
                            const double *w,
                            struct GdProbit **out);

// Number of coefficients (`k + 1`).
//
// # Safety
// `model` must be NULL or a live handle.
size_t gd_probit_len(const struct GdProbit *model);

// Copies coefficients and robust standard errors (either may be NULL)
// into arrays of `len` doubles; `len` must equal [`gd_probit_len`].
//
// # Safety
// `model` must be a live handle; non-NULL arrays must hold `len` doubles.
enum GdStatus gd_probit_coefficients(const struct GdProbit *model,
                                     double *beta,
                                     double *robust_se,
                                     size_t len);

// Log-likelihood at the estimate; NaN for a NULL handle.
//
// # Safety
// `model` must be NULL or a live handle.
double gd_probit_loglik(const struct GdProbit *model);

// # Safety
// `model` must be NULL or a handle from [`gd_probit_fit`], not yet freed.
void gd_probit_free(struct GdProbit *model);

// Two-fold linear decomposition of the gap between groups `a` and `d`.
// `xa` (`na x k`) and `xd` (`nd x k`) are row-major without intercept;
// `beta_a` and `beta_d` hold `k + 1` coefficients, intercept first;
// weights may be NULL. Per-column terms (`k + 1` each) are written when
// the corresponding pointer is not NULL.
//
// # Safety
// Arrays must have the sizes stated above; `explained` and `unexplained`
// must be valid.
enum GdStatus gd_oaxaca_blinder(const double *xa,
                                const double *wa,
                                size_t na,
                                const double *xd,
                                const double *wd,
                                size_t nd,
                                size_t k,
                                const double *beta_a,
                                const double *beta_d,
                                double *explained,
                                double *unexplained,
                                double *explained_by_column,
                                double *unexplained_by_column);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAPDECOMP_H */
