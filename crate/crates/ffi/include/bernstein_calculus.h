/* Generated by cbindgen from crates/ffi/src/lib.rs. */

#ifndef BERNSTEIN_CALCULUS_H
#define BERNSTEIN_CALCULUS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum BcStatus {
  BC_STATUS_OK = 0,
  BC_STATUS_NULL_POINTER = 1,
  BC_STATUS_INVALID_ARGUMENT = 2,
  BC_STATUS_DOMAIN = 3,
  BC_STATUS_SPECTRUM = 4,
  BC_STATUS_HYPOTHESIS = 5,
  BC_STATUS_NUMERICAL = 6,
  BC_STATUS_PARSE = 7,
  BC_STATUS_PANIC = 8,
} BcStatus;

// Report serialization for [`bc_verify_run`].
typedef enum BcFormat {
  BC_FORMAT_RECORDS = 0,
  BC_FORMAT_CSV = 1,
} BcFormat;

// A Bernstein function from the catalog.
typedef struct BcFunction BcFunction;

// A tuple of commuting generators.
typedef struct BcTuple BcTuple;

// Campaign totals.
typedef struct BcVerifySummary {
  size_t reports;
  size_t passed;
  size_t failed;
  size_t gated;
} BcVerifySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *bc_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *bc_version(void);

// Create a function from a catalog name such as `sqrt`, `alpha:0.3` or `sum:log,rat`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum BcStatus bc_function_new(const char *name, struct BcFunction **out);

// # Safety
// `f` must come from [`bc_function_new`] and not be used afterwards; null is ignored.
void bc_function_free(struct BcFunction *f);

// Number of variables, or 0 for a null handle.
//
// # Safety
// `f` must be null or a live handle.
size_t bc_function_arity(const struct BcFunction *f);

// `ψ(s)` for `s` of length `n` with nonpositive entries.
//
// # Safety
// `f` must be live, `s` must point to `n` doubles and `out` to one.
enum BcStatus bc_function_eval(const struct BcFunction *f, const double *s, size_t n, double *out);

// `∂ψ/∂s_i(−0)`; `+INFINITY` when the moment diverges.
//
// # Safety
// `f` must be live and `out` valid.
enum BcStatus bc_function_partial_at_zero(const struct BcFunction *f, size_t i, double *out);

// A seeded random tuple `A_j = S·D_j·S⁻¹` with `κ(S) ≤ kappa_max` and `Re λ ≤ omega < 0`.
//
// # Safety
// `out` must be valid.
enum BcStatus bc_tuple_factory(size_t n,
                               size_t d,
                               uint64_t seed,
                               double kappa_max,
                               double omega,
                               struct BcTuple **out);

// A tuple from `n` row-major `d × d` matrices stacked in `re` and `im`
// (`im` may be null for real input). With `bound_m ≥ 1` the tuple is
// uncertified with that semigroup bound; with `bound_m ≤ 0` and `n = 1` an
// eigendecomposition supplies the bound.
//
// # Safety
// `re` (and `im` when non-null) must point to `n·d·d` doubles; `out` must be valid.
enum BcStatus bc_tuple_from_matrices(const double *re,
                                     const double *im,
                                     size_t n,
                                     size_t d,
                                     double bound_m,
                                     struct BcTuple **out);

// # Safety
// `t` must come from a tuple constructor and not be used afterwards; null is ignored.
void bc_tuple_free(struct BcTuple *t);

// Matrix size `d`, or 0 for a null handle.
//
// # Safety
// `t` must be null or live.
size_t bc_tuple_dim(const struct BcTuple *t);

// Number of generators, or 0 for a null handle.
//
// # Safety
// `t` must be null or live.
size_t bc_tuple_arity(const struct BcTuple *t);

// Semigroup bound `M`, or NaN for a null handle.
//
// # Safety
// `t` must be null or live.
double bc_tuple_bound_m(const struct BcTuple *t);

// `ψ(A)` into row-major `out_re`/`out_im` of length `d·d`. `target_tol ≤ 0`
// selects the default matrix tolerance. `oracle_residual` may be null; it
// receives NaN when no spectral data exist.
//
// # Safety
// Handles must be live; the output arrays must hold `d·d` doubles.
enum BcStatus bc_apply(const struct BcFunction *f,
                       const struct BcTuple *t,
                       double target_tol,
                       double *out_re,
                       double *out_im,
                       double *oracle_residual);

// Run a campaign from configuration text. The serialized report is
// returned in `report` (release with [`bc_string_free`]) and the totals in
// `summary`; either may be null.
//
// # Safety
// `config` must be a NUL-terminated string; non-null outputs must be valid.
enum BcStatus bc_verify_run(const char *config,
                            enum BcFormat format,
                            char **report,
                            struct BcVerifySummary *summary);

// # Safety
// `s` must come from this library and not be used afterwards; null is ignored.
void bc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BERNSTEIN_CALCULUS_H */
