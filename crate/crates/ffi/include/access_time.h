#ifndef ACCESS_TIME_H
#define ACCESS_TIME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum AtStatus {
  AT_OK = 0,
  // Null pointer, invalid UTF-8 or out-of-range argument.
  AT_INVALID_ARGUMENT = 1,
  AT_INVALID_SPEC = 2,
  AT_INVALID_DISTRIBUTION = 3,
  AT_DIMENSION_MISMATCH = 4,
  AT_REDUCIBLE = 5,
  AT_SINGULAR = 6,
  // Operation not defined for this chain (no closed form, not
  // reversible, asymmetric hitting times, too large, ...).
  AT_UNSUPPORTED = 7,
  // Output buffer shorter than required.
  AT_BUFFER_TOO_SMALL = 8,
  // Internal panic; the handle should not be reused.
  AT_PANIC = 9,
} AtStatus;

// A chain together with its solved hitting times.
typedef struct AtChain AtChain;

// Closed-form report for a family chain. `erratum_flag` is -1 when not
// applicable (families other than birth-death), and `mirror_corrected` is
// NaN in that case.
typedef struct AtFamilyReport {
  double exact;
  double lower;
  double upper;
  double solver_value;
  double discrepancy;
  int32_t erratum_flag;
  double mirror_corrected;
} AtFamilyReport;

// Summary of a Monte Carlo run of the independent-target stopping rule.
typedef struct AtSimSummary {
  size_t samples;
  double mean_t;
  double standard_error;
  double tv_to_target;
  double theoretical_mean;
  double access_time;
  // 1 when the mean lies within four standard errors of the theory.
  int32_t within_band;
} AtSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds and solves a chain from a JSON spec such as
// `{"family":"path","n":10}`. On success `*out` owns a handle to be
// released with [`at_chain_free`].
//
// # Safety
// `spec_json` must be a NUL-terminated string and `out` a writable pointer.
enum AtStatus at_chain_new(const char *spec_json, struct AtChain **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `chain` must be null or a handle from [`at_chain_new`] not yet freed.
void at_chain_free(struct AtChain *chain);

// Number of states, or 0 for a null handle.
//
// # Safety
// `chain` must be null or a live handle.
size_t at_chain_size(const struct AtChain *chain);

// `H(mu, nu)` for weight vectors of length `len`. `argmax_target` may be
// null; otherwise it receives the smallest maximizing target index.
//
// # Safety
// `mu` and `nu` must point to `len` doubles; `value` must be writable.
enum AtStatus at_access_time(const struct AtChain *chain,
                             const double *mu,
                             const double *nu,
                             size_t len,
                             double *value,
                             size_t *argmax_target);

// `H(mu, nu)` for distributions in the command-line shorthand
// (`dirac:K`, `uniform`, `binomial:P`, `stationary`, or JSON).
//
// # Safety
// `mu_spec` and `nu_spec` must be NUL-terminated; `value` must be writable.
enum AtStatus at_access_time_spec(const struct AtChain *chain,
                                  const char *mu_spec,
                                  const char *nu_spec,
                                  double *value);

// Writes the `N x N` mean hitting-time matrix in row-major order: entry
// `i * N + j` is `E_i[tau_j]`.
//
// # Safety
// `out` must point to `len` writable doubles.
enum AtStatus at_hitting_matrix(const struct AtChain *chain, double *out, size_t len);

// Writes the stationary distribution.
//
// # Safety
// `out` must point to `len` writable doubles.
enum AtStatus at_stationary(const struct AtChain *chain, double *out, size_t len);

// Largest mean hitting time and the pair attaining it. `from` and `to`
// may be null.
//
// # Safety
// `value` must be writable; `from` and `to` null or writable.
enum AtStatus at_max_hitting(const struct AtChain *chain, double *value, size_t *from, size_t *to);

// `t_av = sum_{i,j} pi_i pi_j E_i[tau_j]`.
//
// # Safety
// `value` must be writable.
enum AtStatus at_tav(const struct AtChain *chain, double *value);

// Closed form, bounds and solver cross-check for a family chain.
// Returns `AtUnsupported` for families without a closed form.
//
// # Safety
// `mu` and `nu` must point to `len` doubles; `out` must be writable.
enum AtStatus at_family_report(const struct AtChain *chain,
                               const double *mu,
                               const double *nu,
                               size_t len,
                               struct AtFamilyReport *out);

// Simulates the independent-target stopping rule from `mu` to `nu`
// (at least 1000 samples). Reproducible for a fixed `seed`.
//
// # Safety
// `mu` and `nu` must point to `len` doubles; `out` must be writable.
enum AtStatus at_simulate(const struct AtChain *chain,
                          const double *mu,
                          const double *nu,
                          size_t len,
                          size_t samples,
                          uint64_t seed,
                          struct AtSimSummary *out);

// Message for the last failed call on this thread, or an empty string.
// Valid until the next call into this library on the same thread.
const char *at_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *at_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACCESS_TIME_H */
