#ifndef ONTIC_H
#define ONTIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OnticStatus {
  ONTIC_STATUS_OK = 0,
  ONTIC_STATUS_NULL_POINTER = 1,
  ONTIC_STATUS_INVALID_ARGUMENT = 2,
  ONTIC_STATUS_DIMENSION_MISMATCH = 3,
  ONTIC_STATUS_NOT_INVERTIBLE = 4,
  ONTIC_STATUS_NOT_NORMALIZED = 5,
  ONTIC_STATUS_RESOURCE_LIMIT = 6,
  ONTIC_STATUS_UNSUPPORTED = 7,
  ONTIC_STATUS_NUMERICAL = 8,
  ONTIC_STATUS_PANIC = 9,
} OnticStatus;

typedef enum OnticBranch {
  /**
   * `[0, 2 pi)`
   */
  ONTIC_BRANCH_ZERO_TO_TWO_PI = 0,
  /**
   * `(-pi, pi]`
   */
  ONTIC_BRANCH_MINUS_PI_TO_PI = 1,
} OnticBranch;

typedef enum OnticMethod {
  ONTIC_METHOD_MONTE_CARLO = 0,
  ONTIC_METHOD_QUADRATURE = 1,
} OnticMethod;

/**
 * Opaque generalized permutation.
 */
typedef struct OnticPermutation OnticPermutation;

/**
 * One correlation estimate. `n` is the sample count or panel count.
 */
typedef struct OnticEstimate {
  double value;
  double std_error;
  uint64_t n;
} OnticEstimate;

typedef struct OnticChsh {
  double s;
  double s_std_error;
  struct OnticEstimate ab;
  struct OnticEstimate abp;
  struct OnticEstimate apb;
  struct OnticEstimate apbp;
  double quantum_reference_s;
  double classical_bound;
  double tsirelson_bound;
} OnticChsh;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ontic_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * NUL-terminated) and returns the full message length without the NUL.
 * Returns 0 when no error has been recorded.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t ontic_last_error_message(char *buf, size_t len);

/**
 * The `n`-state cogwheel `k -> k + 1 mod n`.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum OnticStatus ontic_permutation_cogwheel(size_t n, struct OnticPermutation **out);

/**
 * Cyclic shift on `sites` bits, site 0 being the least significant.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum OnticStatus ontic_permutation_bit_shift(size_t sites, struct OnticPermutation **out);

/**
 * Permutation `e_i -> e^{i phase[i]} e_{target[i]}`. `phase` may be null
 * for a pure permutation.
 *
 * # Safety
 * `target` must be valid for `dim` reads, `phase` null or valid for `dim`
 * reads, `out` valid for one pointer write.
 */
enum OnticStatus ontic_permutation_from_table(const size_t *target,
                                              const double *phase,
                                              size_t dim,
                                              struct OnticPermutation **out);

/**
 * # Safety
 * `p` must be null or a handle from this library not freed before.
 */
void ontic_permutation_free(struct OnticPermutation *p);

/**
 * Dimension of the state space, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t ontic_permutation_dim(const struct OnticPermutation *p);

/**
 * Period of a pure permutation.
 *
 * # Safety
 * `p` must be a live handle, `out` valid for one write.
 */
enum OnticStatus ontic_permutation_period(const struct OnticPermutation *p, uint64_t *out);

/**
 * Evolves the state `amplitudes` (interleaved, `dim` complex entries) by
 * `steps` applications of `p` and writes the result to `out`.
 *
 * # Safety
 * `amplitudes` and `out` must each be valid for `2 * dim` doubles.
 */
enum OnticStatus ontic_permutation_evolve(const struct OnticPermutation *p,
                                          const double *amplitudes,
                                          size_t dim,
                                          uint64_t steps,
                                          double *out);

/**
 * Sorted eigenphases `phi` with `U v = e^{-i phi} v`, placed in `branch`.
 *
 * # Safety
 * `out` must be valid for `dim(p)` doubles.
 */
enum OnticStatus ontic_permutation_eigenphases(const struct OnticPermutation *p,
                                               enum OnticBranch branch,
                                               double *out);

/**
 * Hamiltonian `H` with `exp(-i H dt) = U`, written row-major as `dim * dim`
 * interleaved complex entries.
 *
 * # Safety
 * `out` must be valid for `2 * dim(p) * dim(p)` doubles.
 */
enum OnticStatus ontic_permutation_hamiltonian(const struct OnticPermutation *p,
                                               double dt,
                                               enum OnticBranch branch,
                                               double *out);

/**
 * Classifies a state: `*is_ontological` is 1 and `*index` the occupied
 * basis state, or `*is_ontological` is 0.
 *
 * # Safety
 * `amplitudes` must be valid for `2 * dim` doubles; `is_ontological` and
 * `index` valid for one write each.
 */
enum OnticStatus ontic_state_classify(const double *amplitudes,
                                      size_t dim,
                                      double tol,
                                      int32_t *is_ontological,
                                      size_t *index);

/**
 * `W(a, b, c) = |sin(4c - 2a - 2b)| / 2`.
 */
double ontic_mousedrop_density(double a, double b, double c);

/**
 * `E(a, b)`, angles in radians. `n` is the sample count for Monte Carlo
 * or the panel count for quadrature.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum OnticStatus ontic_bell_correlation(double a,
                                        double b,
                                        enum OnticMethod kind,
                                        uint64_t n,
                                        uint64_t seed,
                                        struct OnticEstimate *out);

/**
 * CHSH combination `E(a,b) - E(a,b') + E(a',b) + E(a',b')`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum OnticStatus ontic_bell_chsh(double a,
                                 double a_prime,
                                 double b,
                                 double b_prime,
                                 enum OnticMethod kind,
                                 uint64_t n,
                                 uint64_t seed,
                                 struct OnticChsh *out);

/**
 * Total variation distance between the hidden-variable densities at
 * settings `(a, b)` and `(a', b')`.
 */
double ontic_counterfactual_shift(double a, double b, double a_prime, double b_prime);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONTIC_H */
