#ifndef STEKLOV_H
#define STEKLOV_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  STEKLOV_STATUS_OK = 0,
  STEKLOV_STATUS_NULL_POINTER = 1,
  /**
   * The input is not a valid tree with boundary.
   */
  STEKLOV_STATUS_INVALID_TREE = 2,
  /**
   * Bad parameter, index out of range, or malformed text.
   */
  STEKLOV_STATUS_INVALID_ARGUMENT = 3,
  STEKLOV_STATUS_NUMERICAL = 4,
  /**
   * The caller's buffer is too small; the required length was written.
   */
  STEKLOV_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * A bound failed its check.
   */
  STEKLOV_STATUS_BOUND_VIOLATED = 6,
  STEKLOV_STATUS_PANIC = 7,
} SteklovStatus;

/**
 * Opaque tree handle.
 */
typedef struct SteklovTree SteklovTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next call on the thread.
 */
const char *steklov_last_error(void);

/**
 * Builds a tree from `edge_count` pairs stored flat in `edges` (`2 * edge_count` entries).
 *
 * # Safety
 * `edges` must point to `2 * edge_count` readable values and `out` must be writable.
 */
SteklovStatus steklov_tree_from_edges(const size_t *edges, size_t edge_count, SteklovTree **out);

/**
 * Parses an edge list or a JSON tree document.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` must be writable.
 */
SteklovStatus steklov_tree_parse(const char *text, SteklovTree **out);

/**
 * Builds a family member from a JSON spec such as `{"family":"BALL","D":3,"r":2}`.
 *
 * # Safety
 * `family_json` must be a NUL-terminated string and `out` must be writable.
 */
SteklovStatus steklov_tree_generate(const char *family_json, SteklovTree **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `tree` must come from this library and must not be used afterwards.
 */
void steklov_tree_free(SteklovTree *tree);

/**
 * # Safety
 * `tree` must be a live handle or null (which yields 0).
 */
size_t steklov_tree_vertex_count(const SteklovTree *tree);

/**
 * # Safety
 * `tree` must be a live handle or null (which yields 0).
 */
size_t steklov_tree_boundary_count(const SteklovTree *tree);

/**
 * `λ_k` (1-based) by inertia counting, without forming the DtN matrix.
 *
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
SteklovStatus steklov_eigenvalue(const SteklovTree *tree, size_t k, double *out);

/**
 * Writes the sorted spectrum into `values`. `*written` receives the
 * spectrum length; if `capacity` is smaller nothing is copied and
 * `BufferTooSmall` is returned.
 *
 * # Safety
 * `tree` must be a live handle, `values` must hold `capacity` doubles, and `written` must be writable.
 */
SteklovStatus steklov_spectrum(const SteklovTree *tree,
                               double *values,
                               size_t capacity,
                               size_t *written);

/**
 * Evaluates every bound and returns the JSON report in `*json` (free it
 * with [`steklov_string_free`]). `ks` may be null to audit the default
 * indices. Returns `BoundViolated` (with the report still written) if any
 * applicable bound fails.
 *
 * # Safety
 * `tree` must be a live handle, `ks` null or readable for `k_count` values, `json` writable.
 */
SteklovStatus steklov_bounds_json(const SteklovTree *tree,
                                  const size_t *ks,
                                  size_t k_count,
                                  char **json);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void steklov_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEKLOV_H */
