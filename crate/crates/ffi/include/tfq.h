#ifndef TFQ_H
#define TFQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

/**
 * Result code of every fallible call.
 */
typedef enum TfqStatus {
  TFQ_STATUS_OK = 0,
  TFQ_STATUS_NULL_POINTER = 1,
  TFQ_STATUS_INVALID_GRID = 2,
  TFQ_STATUS_DIMENSION_MISMATCH = 3,
  TFQ_STATUS_TAU_OUT_OF_RANGE = 4,
  TFQ_STATUS_LATTICE_MISMATCH = 5,
  TFQ_STATUS_ZERO_WINDOW = 6,
  TFQ_STATUS_FRAME_SINGULAR = 7,
  TFQ_STATUS_INVALID_ARGUMENT = 8,
  TFQ_STATUS_INTERNAL = 9,
} TfqStatus;

typedef struct TfqOperator TfqOperator;

typedef struct TfqSignal TfqSignal;

typedef struct TfqSymbol TfqSymbol;

/**
 * Spectral bounds of a Gabor frame operator.
 */
typedef struct TfqFrameBounds {
  double lower;
  double upper;
  double condition_number;
  bool is_frame;
} TfqFrameBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or "" after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *tfq_last_error_message(void);

/**
 * Signal of length `n` from split real/imaginary arrays.
 *
 * # Safety
 * `re` and `im` must point to `n` doubles; `out` must be writable.
 */
enum TfqStatus tfq_signal_new(size_t n, const double *re, const double *im, struct TfqSignal **out);

/**
 * Periodized Gaussian window of unit norm.
 *
 * # Safety
 * `out` must be writable.
 */
enum TfqStatus tfq_signal_gaussian(size_t n, double width, struct TfqSignal **out);

/**
 * # Safety
 * `s` must be null or a handle from this library, not yet freed.
 */
void tfq_signal_free(struct TfqSignal *s);

/**
 * Length of the signal, 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t tfq_signal_len(const struct TfqSignal *s);

/**
 * Copies the samples into caller buffers of length `len`.
 *
 * # Safety
 * `s` must be a live handle; `re`, `im` must hold `len` doubles.
 */
enum TfqStatus tfq_signal_copy(const struct TfqSignal *s, double *re, double *im, size_t len);

/**
 * Symbol on Z_n × Z_n from x-major arrays of length `n * n`.
 *
 * # Safety
 * `re` and `im` must point to `n * n` doubles; `out` must be writable.
 */
enum TfqStatus tfq_symbol_new(size_t n, const double *re, const double *im, struct TfqSymbol **out);

/**
 * # Safety
 * `s` must be null or a handle from this library, not yet freed.
 */
void tfq_symbol_free(struct TfqSymbol *s);

/**
 * Grid size N of the symbol, 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t tfq_symbol_dim(const struct TfqSymbol *s);

/**
 * Copies the symbol values (x-major, `len = N * N`).
 *
 * # Safety
 * `s` must be a live handle; `re`, `im` must hold `len` doubles.
 */
enum TfqStatus tfq_symbol_copy(const struct TfqSymbol *s, double *re, double *im, size_t len);

/**
 * `Op_τ(σ)` as an N × N operator.
 *
 * # Safety
 * `sym` must be a live handle; `out` must be writable.
 */
enum TfqStatus tfq_op_tau(const struct TfqSymbol *sym, double tau, struct TfqOperator **out);

/**
 * τ-symbol of an operator.
 *
 * # Safety
 * `op` must be a live handle; `out` must be writable.
 */
enum TfqStatus tfq_dequantize(const struct TfqOperator *op, double tau, struct TfqSymbol **out);

/**
 * # Safety
 * `op` must be null or a handle from this library, not yet freed.
 */
void tfq_operator_free(struct TfqOperator *op);

/**
 * Dimension N of the operator, 0 for a null handle.
 *
 * # Safety
 * `op` must be null or a live handle.
 */
size_t tfq_operator_dim(const struct TfqOperator *op);

/**
 * Copies the kernel `K[x][y]` row-major (`len = N * N`).
 *
 * # Safety
 * `op` must be a live handle; `re`, `im` must hold `len` doubles.
 */
enum TfqStatus tfq_operator_kernel_copy(const struct TfqOperator *op,
                                        double *re,
                                        double *im,
                                        size_t len);

/**
 * `out = op · f`.
 *
 * # Safety
 * `op`, `f` must be live handles; `out` must be writable.
 */
enum TfqStatus tfq_operator_apply(const struct TfqOperator *op,
                                  const struct TfqSignal *f,
                                  struct TfqSignal **out);

/**
 * Cross τ-Wigner distribution `W_τ(g, f)`.
 *
 * # Safety
 * `g`, `f` must be live handles; `out` must be writable.
 */
enum TfqStatus tfq_tau_wigner(const struct TfqSignal *g,
                              const struct TfqSignal *f,
                              double tau,
                              struct TfqSymbol **out);

/**
 * Frame bounds of the Gabor system of `phi` over the lattice `aZ × bZ`.
 *
 * # Safety
 * `phi` must be a live handle; `out` must be writable.
 */
enum TfqStatus tfq_frame_bounds(const struct TfqSignal *phi,
                                size_t a,
                                size_t b,
                                struct TfqFrameBounds *out);

/**
 * Relative symplectic-covariance residual of `Op_τ(σ)`.
 *
 * # Safety
 * `sym` must be a live handle; `out` must be writable.
 */
enum TfqStatus tfq_covariance_residual(const struct TfqSymbol *sym, double tau, double *out);

/**
 * Weighted Sjöstrand norm of `σ` with window `W_τ(φ, φ)` and weight `v_s`.
 *
 * # Safety
 * `sym`, `phi` must be live handles; `out` must be writable.
 */
enum TfqStatus tfq_sjostrand_norm(const struct TfqSymbol *sym,
                                  const struct TfqSignal *phi,
                                  double tau,
                                  double s,
                                  double *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tfq_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TFQ_H */
