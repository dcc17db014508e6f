#ifndef EMQ_H
#define EMQ_H

/* Generated by cbindgen from the emq-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum EmqStatus {
  EMQ_STATUS_OK = 0,
  // A required pointer was null or an argument was malformed.
  EMQ_STATUS_INVALID_ARGUMENT = 1,
  // The input failed schema or machine validation.
  EMQ_STATUS_VALIDATION_FAILED = 2,
  // A numerical invariant was violated.
  EMQ_STATUS_INVARIANT_FAILED = 3,
  // A resource cap (horizon or memory budget) was exceeded.
  EMQ_STATUS_CAP_EXCEEDED = 4,
  EMQ_STATUS_INTERNAL = 5,
} EmqStatus;

// Opaque handle to a validated machine.
typedef struct EmqMachine EmqMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. The pointer
// stays valid until the next failing call on the same thread.
const char *emq_last_error_message(void);

// Parses a machine document (UTF-8 JSON) into a validated machine.
//
// # Safety
// `json` must be a valid NUL-terminated C string.
enum EmqStatus emq_machine_parse_json(const char *json, struct EmqMachine **out);

// Builds the two-state alternating biased coins machine.
enum EmqStatus emq_machine_biased_coins(double p, struct EmqMachine **out);

// Builds the golden-mean generalization with Markov order `r` and cryptic
// order `k`.
enum EmqStatus emq_machine_rk_golden_mean(size_t r, size_t k, double p, struct EmqMachine **out);

// Builds the three-state infinite-order machine.
enum EmqStatus emq_machine_nemo(double p, struct EmqMachine **out);

// Builds a seeded random unifilar machine (minimized before return).
enum EmqStatus emq_machine_random(size_t n_states,
                                  size_t alphabet_size,
                                  uint64_t seed,
                                  struct EmqMachine **out);

// Merges predictively equivalent states into a fresh handle.
//
// # Safety
// `machine` must be a live handle from this library.
enum EmqStatus emq_machine_minimize(const struct EmqMachine *machine, struct EmqMachine **out);

// Releases a machine handle. Null is ignored.
//
// # Safety
// `machine` must have been produced by this library and not freed before.
void emq_machine_free(struct EmqMachine *machine);

// Number of states; 0 for a null handle.
//
// # Safety
// `machine` must be a live handle or null.
size_t emq_machine_state_count(const struct EmqMachine *machine);

// Whether predictive-equivalence refinement would merge no states.
//
// # Safety
// `machine` must be a live handle or null (null reports false).
bool emq_machine_is_minimal(const struct EmqMachine *machine);

// Serializes the machine back to document JSON; free with
// [`emq_string_free`].
//
// # Safety
// `machine` must be a live handle.
enum EmqStatus emq_machine_to_json(const struct EmqMachine *machine, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must have been produced by this library and not freed before.
void emq_string_free(char *s);

// Shannon entropy of the stationary state distribution, in bits.
//
// # Safety
// `machine` must be a live handle.
enum EmqStatus emq_statistical_complexity(const struct EmqMachine *machine, double *out);

// Per-symbol entropy rate, in bits.
//
// # Safety
// `machine` must be a live handle.
enum EmqStatus emq_entropy_rate(const struct EmqMachine *machine, double *out);

// Excess entropy with truncation horizon `max_l` (0 picks the per-alphabet
// default). `out_converged` reports whether the value is exact or a
// truncated lower bound.
//
// # Safety
// `machine` must be a live handle; out-pointers must be writable or null.
enum EmqStatus emq_excess_entropy(const struct EmqMachine *machine,
                                  double tol,
                                  size_t max_l,
                                  double *out_bits,
                                  bool *out_converged);

// Markov order: smallest history length that determines the state.
// Writes -1 for infinite, -2 for undetermined within budget.
//
// # Safety
// `machine` must be a live handle.
enum EmqStatus emq_markov_order(const struct EmqMachine *machine, int64_t *out);

// Cryptic order: depth of the last pair merger. Writes -1 for infinite.
//
// # Safety
// `machine` must be a live handle.
enum EmqStatus emq_cryptic_order(const struct EmqMachine *machine, int64_t *out);

// Quantum compression value at horizon `l` (`-1` for the asymptotic
// value), in bits, via the pairwise-merger route.
//
// # Safety
// `machine` must be a live handle.
enum EmqStatus emq_cq(const struct EmqMachine *machine, int64_t l, double *out);

// Brute-force oracle for the compression value at finite horizon `l`.
// Subject to the word-space and memory caps.
//
// # Safety
// `machine` must be a live handle.
enum EmqStatus emq_cq_bruteforce(const struct EmqMachine *machine, size_t l, double *out);

// Full classical measure report as flat JSON; free with
// [`emq_string_free`].
//
// # Safety
// `machine` must be a live handle.
enum EmqStatus emq_measure_report_json(const struct EmqMachine *machine, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMQ_H */
