#ifndef LINLAM_H
#define LINLAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Backend selector: the flat natural-numbers model.
 */
#define LIN_BACKEND_STRICT 0

/**
 * Backend selector: the coherence-space model.
 */
#define LIN_BACKEND_COH 1

/**
 * Denotation kind: the program diverges.
 */
#define LIN_DENOTE_BOTTOM 0

/**
 * Denotation kind: a numeral, carried in `value`.
 */
#define LIN_DENOTE_NUM 1

/**
 * Denotation kind: the observation has not stabilised within budget.
 */
#define LIN_DENOTE_UNSTABLE 2

/**
 * Comparison verdict: observably equal within budget.
 */
#define LIN_EQ_EQUAL 0

/**
 * Comparison verdict: a distinguishing input exists (see the error
 * message for the witness).
 */
#define LIN_EQ_DISTINCT 1

/**
 * Comparison verdict: undecided while a fixed point is still
 * stabilising.
 */
#define LIN_EQ_INCONCLUSIVE 2

/**
 * Status code returned by every fallible entry point.
 */
typedef enum LinStatus {
  /**
   * The call succeeded.
   */
  LinStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  LinStatus_NullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  LinStatus_InvalidUtf8 = 2,
  /**
   * The source text did not parse.
   */
  LinStatus_ParseError = 3,
  /**
   * The term does not type under the requested discipline.
   */
  LinStatus_TypeError = 4,
  /**
   * A scalar argument was out of range, or the operands disagree.
   */
  LinStatus_InvalidArgument = 5,
  /**
   * Interpretation failed inside the model backend.
   */
  LinStatus_ModelError = 6,
} LinStatus;

/**
 * Opaque handle to a term.
 */
typedef struct LinTerm LinTerm;

/**
 * Observed denotation of a closed ground term.
 */
typedef struct LinDenotation {
  /**
   * One of the `LIN_DENOTE_*` constants.
   */
  uint32_t kind;
  /**
   * The numeral when `kind` is `LIN_DENOTE_NUM`, zero otherwise.
   */
  uint64_t value;
} LinDenotation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library, as a static NUL-terminated string.
 */
const char *lin_version(void);

/**
 * Copies the detail message for the most recent failure on this thread
 * into `buf` (up to `cap` bytes including the NUL terminator) and
 * returns the full length of the message including the terminator.
 * With a null `buf` or zero `cap`, only the required length is
 * reported.
 */
uintptr_t lin_last_error_message(char *buf, uintptr_t cap);

/**
 * Parses source text into a fresh term handle.
 */
enum LinStatus lin_term_parse(const char *src, struct LinTerm **out);

/**
 * Releases a term handle. Null is ignored.
 */
void lin_term_free(struct LinTerm *t);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void lin_string_free(char *s);

/**
 * Number of syntax nodes in the term.
 */
enum LinStatus lin_term_size(const struct LinTerm *t, uintptr_t *out);

/**
 * Formats the term; the result parses back to the same term.
 */
enum LinStatus lin_term_pretty(const struct LinTerm *t, char **out);

/**
 * Infers the type of the closed term under the core discipline, or the
 * extended one when `ext` is set, and returns it formatted.
 */
enum LinStatus lin_term_infer(const struct LinTerm *t, bool ext, char **out);

/**
 * Normalizes the term with the leftmost strategy under the given fuel.
 * `out_exhausted` reports whether fuel ran out before a normal form.
 */
enum LinStatus lin_term_normalize(const struct LinTerm *t,
                                  uint32_t fuel,
                                  bool ext,
                                  struct LinTerm **out,
                                  uint32_t *out_steps,
                                  bool *out_exhausted);

/**
 * Observes the denotation of a closed ground term in the selected
 * backend. `fix_iters` bounds fixed-point unrolling; 16 is a sound
 * default for small programs.
 */
enum LinStatus lin_term_denote(const struct LinTerm *t,
                               uint32_t backend,
                               uint32_t fix_iters,
                               bool ext,
                               struct LinDenotation *out);

/**
 * Compares two closed terms of the same type by observation in the
 * selected backend. On `LIN_EQ_DISTINCT` the distinguishing input is
 * available through `lin_last_error_message`.
 */
enum LinStatus lin_semantic_eq(const struct LinTerm *left,
                               const struct LinTerm *right,
                               uint32_t backend,
                               bool ext,
                               uint32_t *out_verdict);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LINLAM_H */
