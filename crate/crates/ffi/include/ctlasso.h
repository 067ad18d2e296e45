#ifndef CTLASSO_H
#define CTLASSO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_POINTER = 1,
  // Bad dimensions, parameters or data.
  CT_STATUS_INVALID_ARGUMENT = 2,
  // The numerical routines failed on valid input.
  CT_STATUS_NUMERICAL = 3,
  // The requested λ lies below the computed path.
  CT_STATUS_LAMBDA_BELOW_PATH = 4,
  // A Rust panic was caught at the boundary.
  CT_STATUS_INTERNAL = 5,
} CtStatus;

typedef enum CtMethod {
  CT_METHOD_LASSO = 0,
  CT_METHOD_UST = 1,
  CT_METHOD_ADAPTIVE_LASSO = 2,
  CT_METHOD_ELASTIC_NET = 3,
  CT_METHOD_CT_HARD = 4,
  CT_METHOD_CT_SOFT = 5,
  CT_METHOD_CT_ADAPTIVE = 6,
} CtMethod;

typedef enum CtTermination {
  CT_TERMINATION_CORRELATION_EXHAUSTED = 0,
  CT_TERMINATION_EIGENVALUE_STOP = 1,
  CT_TERMINATION_MAX_STEPS = 2,
  CT_TERMINATION_LAMBDA_FLOOR = 3,
} CtTermination;

typedef enum CtCvVariant {
  CT_CV_VARIANT_MINUS = 0,
  CT_CV_VARIANT_ZERO = 1,
  CT_CV_VARIANT_PLUS = 2,
  CT_CV_VARIANT_AUTO = 3,
} CtCvVariant;

// A standardized data set.
typedef struct CtDesign CtDesign;

// A computed solution path.
typedef struct CtPath CtPath;

// An estimator and its fixed parameters. Fields a method does not use are
// ignored.
typedef struct CtSpec {
  enum CtMethod method;
  double nu;
  double gamma;
  double lambda2;
} CtSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *ct_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ct_version(void);

// Standardizes an `n × p` row-major matrix `x` and response `y`.
//
// # Safety
// `x` must point to `n*p` doubles, `y` to `n` doubles, `out` to writable
// storage for one pointer.
enum CtStatus ct_design_new(const double *x,
                            const double *y,
                            uintptr_t n,
                            uintptr_t p,
                            struct CtDesign **out);

// # Safety
// `design` must come from [`ct_design_new`] and not be used afterwards.
void ct_design_free(struct CtDesign *design);

// # Safety
// `design` must be a live handle or NULL.
uintptr_t ct_design_n(const struct CtDesign *design);

// # Safety
// `design` must be a live handle or NULL.
uintptr_t ct_design_p(const struct CtDesign *design);

// Converts standardized coefficients to the original units.
//
// # Safety
// `beta` and `slopes` must each hold `len` doubles; `intercept` must be
// writable.
enum CtStatus ct_design_to_original(const struct CtDesign *design,
                                    const double *beta,
                                    uintptr_t len,
                                    double *slopes,
                                    double *intercept);

// Computes the solution path. `max_steps == 0` selects the default cap.
// If the active block turns singular, the partial path is still returned
// through `out` together with [`CtStatus::Numerical`].
//
// # Safety
// `design` must be live, `spec` readable and `out` writable.
enum CtStatus ct_path_new(const struct CtDesign *design,
                          const struct CtSpec *spec,
                          uintptr_t max_steps,
                          struct CtPath **out);

// # Safety
// `path` must come from [`ct_path_new`] and not be used afterwards.
void ct_path_free(struct CtPath *path);

// Number of breakpoints.
//
// # Safety
// `path` must be a live handle or NULL.
uintptr_t ct_path_len(const struct CtPath *path);

// Number of coefficients.
//
// # Safety
// `path` must be a live handle or NULL.
uintptr_t ct_path_p(const struct CtPath *path);

// # Safety
// `path` must be live and `out` writable.
enum CtStatus ct_path_termination(const struct CtPath *path, enum CtTermination *out);

// λ and coefficients (standardized scale) at breakpoint `index`.
//
// # Safety
// `path` must be live, `lambda` writable and `beta` hold `len` doubles.
enum CtStatus ct_path_breakpoint(const struct CtPath *path,
                                 uintptr_t index,
                                 double *lambda,
                                 double *beta,
                                 uintptr_t len);

// Coefficients at any λ by linear interpolation. With `clamp` nonzero a λ
// below the path end returns the last breakpoint; otherwise it fails with
// [`CtStatus::LambdaBelowPath`].
//
// # Safety
// `path` must be live and `beta` hold `len` doubles.
enum CtStatus ct_path_coefficients_at(const struct CtPath *path,
                                      double lambda,
                                      bool clamp,
                                      double *beta,
                                      uintptr_t len);

// K-fold cross-validated λ for a fixed spec (default 100-point log grid).
//
// # Safety
// `design` must be live, `spec` readable and `lambda` writable.
enum CtStatus ct_cv_lambda(const struct CtDesign *design,
                           const struct CtSpec *spec,
                           uintptr_t folds,
                           enum CtCvVariant variant,
                           uint64_t seed,
                           double *lambda);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CTLASSO_H */
