#ifndef SQCHAOS_H
#define SQCHAOS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SqcStatus {
  SQC_STATUS_OK = 0,
  SQC_STATUS_ERR_INPUT = 1,
  SQC_STATUS_ERR_RESOURCE = 2,
  SQC_STATUS_ERR_INTERNAL = 3,
  SQC_STATUS_ERR_NULL = 4,
} SqcStatus;

/*
 Opaque exact correlation matrix.
 */
typedef struct SqcCorrelation SqcCorrelation;

/*
 Opaque symmetric positive definite matrix.
 */
typedef struct SqcMatrix SqcMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer
 stays valid until the next `sqc_*` call on the same thread.
 */
const char *sqc_last_error_message(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void sqc_string_free(char *s);

/*
 Parses a correlation matrix from rows separated by `;` with entries
 separated by spaces or commas, e.g. `"1 1/2; 1/2 1"`.

 # Safety
 `text` must be a NUL-terminated string; `out` must be writable.
 */
enum SqcStatus sqc_correlation_parse(const char *text, struct SqcCorrelation **out);

/*
 # Safety
 `c` must be a handle from [`sqc_correlation_parse`] or NULL.
 */
void sqc_correlation_free(struct SqcCorrelation *c);

/*
 # Safety
 `c` must be a live handle; `out` must be writable.
 */
enum SqcStatus sqc_correlation_dim(const struct SqcCorrelation *c, size_t *out);

/*
 `E[∏ H_{p_i}(G_i)²]` as an exact `num` or `num/den` string.

 # Safety
 `c` must be a live handle, `p` must point to `len` values, `out` must be
 writable.
 */
enum SqcStatus sqc_squared_hermite_moment(const struct SqcCorrelation *c,
                                          const uint32_t *p,
                                          size_t len,
                                          char **out);

/*
 `E[∏ G_i^{m_i}]` as an exact string.

 # Safety
 As for [`sqc_squared_hermite_moment`].
 */
enum SqcStatus sqc_isserlis_moment(const struct SqcCorrelation *c,
                                   const uint32_t *exponents,
                                   size_t len,
                                   char **out);

/*
 JSON verification report for `E[∏ H_{p_i}(G_i)²] ≥ ∏ p_i!`.

 # Safety
 As for [`sqc_squared_hermite_moment`].
 */
enum SqcStatus sqc_verify_hgp(const struct SqcCorrelation *c,
                              const uint32_t *p,
                              size_t len,
                              char **out_json);

/*
 `sqrt(2^K Γ(K + n/2) / (Γ(n/2) ∏ k_i!))`.

 # Safety
 `ks` must point to `len` values; `out` must be writable.
 */
enum SqcStatus sqc_new_bound(uint32_t n, const uint32_t *ks, size_t len, double *out);

/*
 `sqrt(2^{K-2} K^K / ∏ k_i^{k_i})`.

 # Safety
 As for [`sqc_new_bound`].
 */
enum SqcStatus sqc_pinasco_bound(const uint32_t *ks, size_t len, double *out);

/*
 Parses a symmetric positive definite matrix from row-major text (rows on
 separate lines) or a JSON array of rows.

 # Safety
 `text` must be a NUL-terminated string; `out` must be writable.
 */
enum SqcStatus sqc_matrix_parse(const char *text, struct SqcMatrix **out);

/*
 # Safety
 `m` must be a handle from [`sqc_matrix_parse`] or NULL.
 */
void sqc_matrix_free(struct SqcMatrix *m);

/*
 `(det S)^{-1/2}` through the Gaussian-integral form; the matrix must be
 admissible (`S_ii < 1`, `λ_max(diag S + S) < 2`).

 # Safety
 `m` must be a live handle; `out` must be writable.
 */
enum SqcStatus sqc_hadamard_closed_form(const struct SqcMatrix *m, double *out);

/*
 Hermite series for `(det S)^{-1/2}` truncated at total degree `order`.

 # Safety
 As for [`sqc_hadamard_closed_form`].
 */
enum SqcStatus sqc_hadamard_series(const struct SqcMatrix *m, uint32_t order, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQCHAOS_H */
