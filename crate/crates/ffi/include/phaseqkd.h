#ifndef PHASEQKD_H
#define PHASEQKD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PQ_BIT_ZERO 0

#define PQ_BIT_ONE 1

#define PQ_OUTCOME_BIT0 0

#define PQ_OUTCOME_BIT1 1

#define PQ_OUTCOME_DK 2

#define PQ_SOURCE_R 0

#define PQ_SOURCE_P 1

#define PQ_ATTACK_NONE 0

#define PQ_ATTACK_UKD 1

/**
 * Side length of a POVM element matrix (vacuum plus two polarization modes).
 */
#define PQ_POVM_DIM 3

typedef enum PqStatus {
  PQ_STATUS_OK = 0,
  PQ_STATUS_NULL_POINTER = 1,
  /**
   * An argument was rejected; see the last error message.
   */
  PQ_STATUS_INVALID_ARGUMENT = 2,
  PQ_STATUS_INTERNAL = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  PQ_STATUS_PANIC = 4,
} PqStatus;

typedef enum PqVerdictR {
  PQ_VERDICT_R_SECURE = 0,
  PQ_VERDICT_R_NOT_PROVEN = 1,
} PqVerdictR;

typedef enum PqVerdictP {
  PQ_VERDICT_P_BROKEN = 0,
  PQ_VERDICT_P_UNKNOWN = 1,
} PqVerdictP;

/**
 * Opaque handle to the unambiguous-discrimination measurement.
 */
typedef struct PqPovm PqPovm;

/**
 * Opaque handle to a security verdict.
 */
typedef struct PqSecurityReport PqSecurityReport;

typedef struct PqPhotonStats {
  double p0;
  double p1;
  double p_multi;
} PqPhotonStats;

typedef struct PqComplex {
  double re;
  double im;
} PqComplex;

typedef struct PqSecurityValues {
  double mu;
  double delta;
  double p_d;
  double p_m;
  double big_delta;
  double delta_p_bound;
  double threshold_one_way;
  double threshold_two_way;
  double mu_star;
  enum PqVerdictR verdict_r;
  enum PqVerdictP verdict_p;
} PqSecurityValues;

typedef struct PqRunConfig {
  uint64_t n_signals;
  /**
   * `PQ_SOURCE_R` or `PQ_SOURCE_P`.
   */
  uint32_t source;
  double mu;
  double theta;
  double phi;
  /**
   * `PQ_ATTACK_NONE` or `PQ_ATTACK_UKD`.
   */
  uint32_t attack;
  double channel_transmittance;
  uint64_t seed;
  uint32_t workers;
} PqRunConfig;

/**
 * Counters and estimates from one run. Estimates that are undefined for
 * the run (nothing sifted, no eavesdropper) are NaN.
 */
typedef struct PqProtocolStats {
  uint64_t sent;
  uint64_t detected;
  uint64_t sifted;
  uint64_t errors;
  double detection_rate;
  double detection_rate_std_err;
  double error_rate_hat;
  double error_rate_std_err;
  double eve_agreement;
  uint64_t sent_by_bit[2];
  uint64_t forwarded_by_bit[2];
} PqProtocolStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or null.
 *
 * The pointer stays valid until the next `pq_*` call on the same thread.
 */
const char *pq_last_error_message(void);

/**
 * Photon-number distribution of a coherent source with mean `mu`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `PqPhotonStats`.
 */
enum PqStatus pq_photon_statistics(double mu, struct PqPhotonStats *out);

/**
 * Probability that Eve's measurement is conclusive on a signal carrying
 * `bit`, averaged over bases.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum PqStatus pq_conclusive_probability(uint32_t bit, double mu, double *out);

/**
 * Bob's detection rate under the attack, as used in the security bound.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum PqStatus pq_detection_rate_bound(double mu, double *out);

/**
 * Bit error rate the intercept/resend attack induces in the sifted key.
 */
double pq_induced_error_rate(void);

/**
 * Largest mean photon number for which source R is provably secure at
 * error rate `delta`.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum PqStatus pq_max_secure_mu(double delta, double *out);

/**
 * Builds Eve's measurement for source P at mean `mu` and phase `phi`.
 *
 * # Safety
 * `out` must be null or point to writable storage for one pointer. The
 * handle written there must be released with `pq_povm_free`.
 */
enum PqStatus pq_povm_new(double mu, double phi, struct PqPovm **out);

/**
 * Copies one POVM element as a row-major 3×3 complex matrix into
 * `matrix`, which must hold `PQ_POVM_DIM * PQ_POVM_DIM` entries.
 *
 * # Safety
 * `povm` must come from `pq_povm_new` and not yet be freed; `matrix` must
 * be null or valid for nine writes.
 */
enum PqStatus pq_povm_element(const struct PqPovm *povm, uint32_t which, struct PqComplex *matrix);

/**
 * Outcome probabilities `[bit0, bit1, inconclusive]` for the source-P
 * signal carrying `bit` in basis `basis` (0 = Z, 1 = X).
 *
 * # Safety
 * `povm` must be a live handle; `probs` must be null or valid for three
 * writes.
 */
enum PqStatus pq_povm_signal_outcomes(const struct PqPovm *povm,
                                      uint32_t bit,
                                      uint32_t basis,
                                      double *probs);

/**
 * Releases a handle from `pq_povm_new`. Null is ignored.
 *
 * # Safety
 * `povm` must be null or a handle not already freed.
 */
void pq_povm_free(struct PqPovm *povm);

/**
 * Security verdict for error rate `delta`, mean `mu` and detection rate
 * `p_d`. A negative `p_d` selects the detection rate the attack itself
 * produces.
 *
 * # Safety
 * `out` must be null or point to writable storage for one pointer. The
 * handle must be released with `pq_security_report_free`.
 */
enum PqStatus pq_security_report_new(double delta,
                                     double mu,
                                     double p_d,
                                     struct PqSecurityReport **out);

/**
 * Copies the numeric fields and verdicts of a report.
 *
 * # Safety
 * `report` must be a live handle; `out` must be null or writable.
 */
enum PqStatus pq_security_report_values(const struct PqSecurityReport *report,
                                        struct PqSecurityValues *out);

/**
 * Serializes a report as JSON with nine significant digits. The string
 * must be released with `pq_string_free`.
 *
 * # Safety
 * `report` must be a live handle; `out` must be null or writable.
 */
enum PqStatus pq_security_report_to_json(const struct PqSecurityReport *report, char **out);

/**
 * Releases a handle from `pq_security_report_new`. Null is ignored.
 *
 * # Safety
 * `report` must be null or a handle not already freed.
 */
void pq_security_report_free(struct PqSecurityReport *report);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not already freed.
 */
void pq_string_free(char *s);

/**
 * Simulates one protocol run.
 *
 * # Safety
 * `config` must be null or point to a valid `PqRunConfig`; `out` must be
 * null or writable.
 */
enum PqStatus pq_run_protocol(const struct PqRunConfig *config, struct PqProtocolStats *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pq_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHASEQKD_H */
