#ifndef TOPONAME_H
#define TOPONAME_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum TnStatus {
  TN_STATUS_OK = 0,
  TN_STATUS_NULL_ARGUMENT = 1,
  TN_STATUS_INVALID_UTF8 = 2,
  TN_STATUS_INVALID_GRAPH = 3,
  TN_STATUS_PARSE_ERROR = 4,
  TN_STATUS_NAME_ERROR = 5,
  TN_STATUS_EMBED_ERROR = 6,
  TN_STATUS_INVALID_ARGUMENT = 7,
  TN_STATUS_PANIC = 8,
} TnStatus;

/**
 * Object type selector for naming. `FromGraph` uses the type stored in the
 * graph.
 */
typedef enum TnObjectType {
  TN_OBJECT_TYPE_FROM_GRAPH = -1,
  TN_OBJECT_TYPE_MITO = 0,
  TN_OBJECT_TYPE_PYR = 1,
  TN_OBJECT_TYPE_OTHER = 2,
} TnObjectType;

typedef struct TnModel TnModel;

typedef struct TnReduced TnReduced;

typedef struct TnSkeleton TnSkeleton;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *tn_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void tn_string_free(char *s);

/**
 * Parses a skeleton document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TnStatus tn_skeleton_from_json(const char *json, struct TnSkeleton **out);

/**
 * # Safety
 * `g` must be null or a handle from this library not yet freed.
 */
void tn_skeleton_free(struct TnSkeleton *g);

/**
 * Reduces a skeleton. `tau_relative` scales `tau` by the total length.
 *
 * # Safety
 * `g` must be a live skeleton handle; `out` must be writable.
 */
enum TnStatus tn_reduce(const struct TnSkeleton *g,
                        double tau,
                        bool tau_relative,
                        bool preserve_loops,
                        bool smooth,
                        struct TnReduced **out);

/**
 * Parses a reduced-graph document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TnStatus tn_reduced_from_json(const char *json, struct TnReduced **out);

/**
 * Serializes a reduced graph; free the result with `tn_string_free`.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum TnStatus tn_reduced_to_json(const struct TnReduced *g, char **out);

/**
 * Node, edge and independent-cycle counts.
 *
 * # Safety
 * `g` must be a live handle; the out pointers must be writable.
 */
enum TnStatus tn_reduced_counts(const struct TnReduced *g,
                                size_t *nodes,
                                size_t *edges,
                                size_t *cycle_rank);

/**
 * # Safety
 * `g` must be null or a handle from this library not yet freed.
 */
void tn_reduced_free(struct TnReduced *g);

/**
 * Canonical name; free the result with `tn_string_free`.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum TnStatus tn_name(const struct TnReduced *g, enum TnObjectType object_type, char **out);

/**
 * Builds the graph a name describes. On a parse failure `error_pos`, if
 * non-null, receives the byte offset of the offending token.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable;
 * `error_pos` may be null.
 */
enum TnStatus tn_parse_name(const char *name, struct TnReduced **out, size_t *error_pos);

/**
 * Cosine similarity of the two graphs' Laplacian spectra.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum TnStatus tn_spectrum_cosine(const struct TnReduced *a, const struct TnReduced *b, double *out);

/**
 * Loads an embedding model document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TnStatus tn_model_from_json(const char *json, struct TnModel **out);

/**
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void tn_model_free(struct TnModel *m);

/**
 * Mean matched embedding distance between two graphs (0 = identical).
 *
 * # Safety
 * All handles must be live; `out` must be writable.
 */
enum TnStatus tn_graph_similarity(const struct TnModel *m,
                                  const struct TnReduced *a,
                                  const struct TnReduced *b,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPONAME_H */
