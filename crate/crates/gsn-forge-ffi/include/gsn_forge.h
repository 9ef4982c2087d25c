#ifndef GSN_FORGE_H
#define GSN_FORGE_H

/* Generated by cbindgen from the gsn-forge-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Validation profile selector.
 */
typedef enum GsnfProfile {
  /**
   * Instantiated assurance case: pattern machinery is forbidden.
   */
  GSNF_PROFILE_CASE = 0,
  /**
   * Assurance-case pattern: pattern machinery is required.
   */
  GSNF_PROFILE_PATTERN = 1,
} GsnfProfile;

/**
 * Prose parser strictness.
 */
typedef enum GsnfProseMode {
  /**
   * Reject any deviation from the canonical prose shape.
   */
  GSNF_PROSE_MODE_STRICT = 0,
  /**
   * Repair common deviations and record them as anomalies.
   */
  GSNF_PROSE_MODE_LENIENT = 1,
} GsnfProseMode;

/**
 * Result code for fallible entry points.
 */
typedef enum GsnfStatus {
  /**
   * The call succeeded.
   */
  GSNF_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  GSNF_STATUS_NULL_ARGUMENT = 1,
  /**
   * An input string was not valid UTF-8.
   */
  GSNF_STATUS_INVALID_UTF8 = 2,
  /**
   * The input text could not be parsed.
   */
  GSNF_STATUS_PARSE_FAILED = 3,
  /**
   * The graph could not be rendered in the requested format.
   */
  GSNF_STATUS_RENDER_FAILED = 4,
  /**
   * The binding plan was malformed or did not fit the pattern.
   */
  GSNF_STATUS_PLAN_FAILED = 5,
} GsnfStatus;

/**
 * Opaque assurance-case graph handle.
 */
typedef struct GsnfGraph GsnfGraph;

/**
 * Similarity scores between two texts, each in [0, 1].
 */
typedef struct GsnfScores {
  double exact_match;
  double bleu;
  double tfidf_cosine;
} GsnfScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on the calling thread, or null if
 * the last call succeeded. Do not free; the pointer is valid until the
 * next call into this library on the same thread.
 */
const char *gsnf_last_error(void);

/**
 * Parses predicate text into a graph and writes the handle to
 * `out_graph`. Parser warnings are discarded at this boundary; use the
 * CLI when diagnostics matter.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out_graph` a valid
 * location to write one pointer.
 */
enum GsnfStatus gsnf_parse_predicate(const char *text, struct GsnfGraph **out_graph);

/**
 * Parses prose text into a graph and writes the handle to `out_graph`.
 * Lenient-mode anomalies are discarded at this boundary.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out_graph` a valid
 * location to write one pointer.
 */
enum GsnfStatus gsnf_parse_prose(const char *text,
                                 enum GsnfProseMode mode,
                                 struct GsnfGraph **out_graph);

/**
 * Renders a graph as canonical predicate text. Returns null when `graph`
 * is null.
 *
 * # Safety
 * A non-null `graph` must be a live handle from this library.
 */
char *gsnf_serialize_predicate(const struct GsnfGraph *graph);

/**
 * Renders a graph as prose. Returns null when `graph` is null or the
 * graph has no prose form (for example, multiple roots).
 *
 * # Safety
 * A non-null `graph` must be a live handle from this library.
 */
char *gsnf_render_prose(const struct GsnfGraph *graph);

/**
 * Renders a graph as Graphviz DOT. Returns null when `graph` is null.
 *
 * # Safety
 * A non-null `graph` must be a live handle from this library.
 */
char *gsnf_render_dot(const struct GsnfGraph *graph);

/**
 * Returns the graph's element, relationship, placeholder, and decorator
 * counts as a JSON document. Returns null when `graph` is null.
 *
 * # Safety
 * A non-null `graph` must be a live handle from this library.
 */
char *gsnf_count_summary_json(const struct GsnfGraph *graph);

/**
 * Validates a graph under the given profile and returns the full report
 * (profile, diagnostics, severities) as a JSON document. A report with
 * findings is still a successful call; inspect the JSON. Returns null
 * only when `graph` is null.
 *
 * # Safety
 * A non-null `graph` must be a live handle from this library.
 */
char *gsnf_validate_json(const struct GsnfGraph *graph, enum GsnfProfile profile);

/**
 * Expands a pattern into a case under a JSON binding plan and writes the
 * handle to `out_graph`.
 *
 * # Safety
 * A non-null `pattern` must be a live handle from this library,
 * `plan_json` a valid NUL-terminated string, and `out_graph` a valid
 * location to write one pointer.
 */
enum GsnfStatus gsnf_instantiate(const struct GsnfGraph *pattern,
                                 const char *plan_json,
                                 struct GsnfGraph **out_graph);

/**
 * Scores `candidate` against `reference` and writes the three similarity
 * metrics to `out_scores`.
 *
 * # Safety
 * `candidate` and `reference` must be valid NUL-terminated strings and
 * `out_scores` a valid location to write one [`GsnfScores`].
 */
enum GsnfStatus gsnf_score(const char *candidate,
                           const char *reference,
                           struct GsnfScores *out_scores);

/**
 * Releases a graph handle. Null is a no-op.
 *
 * # Safety
 * A non-null `graph` must be a live handle from this library; it must
 * not be used afterwards.
 */
void gsnf_graph_free(struct GsnfGraph *graph);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 * A non-null `text` must have been returned by this library; it must not
 * be used afterwards.
 */
void gsnf_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSN_FORGE_H */
