#ifndef SQFREE_H
#define SQFREE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SqfStatus {
  SQF_STATUS_OK = 0,
  SQF_STATUS_INVALID_ARGUMENT = 1,
  SQF_STATUS_OUT_OF_RANGE = 2,
  SQF_STATUS_NOT_COPRIME = 3,
  SQF_STATUS_NOT_A_ROOT = 4,
  SQF_STATUS_NOT_ODD_PRIME = 5,
  SQF_STATUS_INCONSISTENT = 6,
  SQF_STATUS_NULL_POINTER = 7,
  SQF_STATUS_PANIC = 8,
} SqfStatus;

/**
 * Square-free flags of `n^2 + 1` and `n^2 + 2` over `[lo, hi]`.
 */
typedef struct SqfFlags SqfFlags;

/**
 * Roots of `n^2 + a ≡ 0 (mod q)` in `[1, q]`, ascending.
 */
typedef struct SqfRootSet SqfRootSet;

/**
 * A representation `x^2 + 2y^2 = n` of a root `z`, with the approximation
 * `a/q` it came from and `r = zq - an`.
 */
typedef struct SqfPreimage {
  int64_t a;
  uint64_t q;
  int64_t r;
  /**
   * `r^2 + 2q^2 = 2n` rather than `n`
   */
  bool doubled;
  uint64_t x;
  int64_t y;
} SqfPreimage;

typedef struct SqfComplex {
  double re;
  double im;
} SqfComplex;

/**
 * Both sides of the ψ-sum identity for `d1 > sqrt(X)`, `X` a perfect
 * square, as reduced fractions.
 */
typedef struct SqfPrehod {
  int64_t lhs_num;
  int64_t lhs_den;
  int64_t rhs_num;
  int64_t rhs_den;
  bool equal;
  bool closed_forms_hold;
} SqfPrehod;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call into this library on the same thread.
 */
const char *sqf_last_error(void);

/**
 * Static description of a status code.
 */
const char *sqf_status_name(enum SqfStatus status);

/**
 * Möbius function of `n >= 1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SqfStatus sqf_mobius(uint64_t n, int8_t *out);

/**
 * Number of distinct prime factors of `n >= 1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SqfStatus sqf_omega(uint64_t n, uint32_t *out);

/**
 * Number of divisors of `n >= 1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SqfStatus sqf_tau(uint64_t n, uint64_t *out);

/**
 * `Γ(X)` and `σ X` for `1 <= X <= 10^7`.
 *
 * # Safety
 * `gamma_out` and `sigma_x_out` must be valid for writes.
 */
enum SqfStatus sqf_gamma(uint64_t x, uint64_t *gamma_out, double *sigma_x_out);

/**
 * `Γ(X)` through the Möbius decomposition split at `z`.
 *
 * # Safety
 * `total_out` must be valid for writes.
 */
enum SqfStatus sqf_gamma_decomposed(uint64_t x, double z, int64_t *total_out);

/**
 * Euler product over odd primes `<= prime_bound`, with its tail bound.
 *
 * # Safety
 * `value_out` and `tail_out` must be valid for writes.
 */
enum SqfStatus sqf_sigma_product(uint64_t prime_bound, double *value_out, double *tail_out);

/**
 * Divisor-sum form truncated at `d1 d2 <= dmax`, with its tail bound.
 *
 * # Safety
 * `value_out` and `tail_out` must be valid for writes.
 */
enum SqfStatus sqf_sigma_sum(uint64_t dmax, double *value_out, double *tail_out);

/**
 * `#{1 <= n <= q1 q2 : q1 | n^2 + 1, q2 | n^2 + 2}`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SqfStatus sqf_lambda(uint64_t q1, uint64_t q2, uint64_t *out);

/**
 * # Safety
 * `out` must be valid for writes. On success `*out` owns a handle to be
 * released with `sqf_roots_free`.
 */
enum SqfStatus sqf_roots_new(uint8_t a, uint64_t q, struct SqfRootSet **out);

/**
 * Number of roots; 0 for a null handle.
 *
 * # Safety
 * `set` must be null or a live handle from `sqf_roots_new`.
 */
size_t sqf_roots_len(const struct SqfRootSet *set);

/**
 * # Safety
 * `set` must be a live handle; `out` must be valid for writes.
 */
enum SqfStatus sqf_roots_get(const struct SqfRootSet *set, size_t index, uint64_t *out);

/**
 * # Safety
 * `set` must be null or a handle from `sqf_roots_new` not yet freed.
 */
void sqf_roots_free(struct SqfRootSet *set);

/**
 * `prime_bound = 0` selects the smallest sound bound.
 *
 * # Safety
 * `out` must be valid for writes. On success `*out` owns a handle to be
 * released with `sqf_sieve_free`.
 */
enum SqfStatus sqf_sieve_new(uint64_t lo, uint64_t hi, uint64_t prime_bound, struct SqfFlags **out);

/**
 * # Safety
 * `flags` must be a live handle; `sf1` and `sf2` must be valid for writes.
 */
enum SqfStatus sqf_sieve_get(const struct SqfFlags *flags, uint64_t n, bool *sf1, bool *sf2);

/**
 * Count of `n` in the interval with both values square-free; 0 for null.
 *
 * # Safety
 * `flags` must be null or a live handle.
 */
uint64_t sqf_sieve_pair_count(const struct SqfFlags *flags);

/**
 * # Safety
 * `flags` must be null or a handle from `sqf_sieve_new` not yet freed.
 */
void sqf_sieve_free(struct SqfFlags *flags);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SqfStatus sqf_construct_preimage(uint64_t z, uint64_t n, struct SqfPreimage *out);

/**
 * `Σ_{alpha <= x <= beta, (x, r) = 1} e(h inv(x) / r)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SqfStatus sqf_kloosterman(int64_t r,
                               int64_t h,
                               double alpha,
                               double beta,
                               struct SqfComplex *out);

/**
 * `Θ_m` computed directly and through representations.
 *
 * # Safety
 * `direct_out` and `reps_out` must be valid for writes.
 */
enum SqfStatus sqf_theta(double d2,
                         int64_t m,
                         uint64_t x,
                         struct SqfComplex *direct_out,
                         struct SqfComplex *reps_out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SqfStatus sqf_prehod(uint64_t d1, uint64_t x, struct SqfPrehod *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQFREE_H */
