/* C ABI for the opseq recurrence solver.
 *
 * Problems are opaque handles parsed from the JSON problem-file schema
 * (see the project README). All numeric results are written into
 * caller-provided double buffers, row-major, d*d entries per matrix.
 * Every call returns an opseq_status; on failure,
 * opseq_last_error_message() describes the most recent error on the
 * calling thread.
 *
 * Kept in lockstep with crates/opseq-ffi/src/lib.rs.
 */

#ifndef OPSEQ_H
#define OPSEQ_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum opseq_status {
  OPSEQ_OK = 0,
  OPSEQ_NUMERIC_MISMATCH = 1,
  OPSEQ_INVALID_INPUT = 2,
  OPSEQ_INTERNAL_ERROR = 3,
  OPSEQ_NULL_POINTER = 4,
  OPSEQ_BUFFER_TOO_SMALL = 5,
} opseq_status;

/* Opaque problem handle. */
typedef struct OpseqProblem OpseqProblem;

/* Parse a problem from a NUL-terminated JSON string. On OPSEQ_OK, *out
 * owns a handle that must be released with opseq_problem_free. */
opseq_status opseq_problem_parse_json(const char *json, OpseqProblem **out);

/* Release a handle; null is a no-op. */
void opseq_problem_free(OpseqProblem *p);

/* Recurrence order r, or 0 on null. */
uint32_t opseq_problem_order(const OpseqProblem *p);

/* Matrix dimension d, or 0 on null. */
uint32_t opseq_problem_dim(const OpseqProblem *p);

/* Closed-form term T_n (n >= r), written row-major into out[0..d*d). */
opseq_status opseq_closed_term(const OpseqProblem *p, int64_t n, double *out,
                               size_t len);

/* Term T_n by direct iteration (n >= 0); the oracle route. */
opseq_status opseq_iterate_term(const OpseqProblem *p, int64_t n, double *out,
                                size_t len);

/* Fundamental-solution coefficient rho(m); the zero matrix below m = r. */
opseq_status opseq_rho(const OpseqProblem *p, int64_t m, double *out,
                       size_t len);

/* Bell-polynomial exponential e^T for a power-sequence problem (scalar
 * coefficients, initial terms I, T, ..., T^{r-1}). */
opseq_status opseq_expm(const OpseqProblem *p, double *out, size_t len);

/* Description of the most recent error on this thread; valid until the
 * next failing call on the same thread. */
const char *opseq_last_error_message(void);

/* Static version string. */
const char *opseq_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* OPSEQ_H */
