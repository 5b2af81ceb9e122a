#ifndef HEATSPARSE_H
#define HEATSPARSE_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  HS_STATUS_INVALID_ARGUMENT = 2,
  HS_STATUS_LENGTH_MISMATCH = 3,
  /**
   * Bad weights, self loops, disconnected input and similar.
   */
  HS_STATUS_INVALID_GRAPH = 4,
  HS_STATUS_IO = 5,
  HS_STATUS_PARSE = 6,
  /**
   * Factorization or solver breakdown.
   */
  HS_STATUS_NUMERICAL = 7,
  /**
   * The call finished but did not reach its tolerance; outputs are valid.
   */
  HS_STATUS_NOT_CONVERGED = 8,
  HS_STATUS_PANIC = 9,
} HsStatus;

typedef enum {
  HS_TREE_KIND_MAX_WEIGHT = 0,
  HS_TREE_KIND_LOW_STRETCH = 1,
} HsTreeKind;

/**
 * Opaque weighted graph.
 */
typedef struct HsGraph HsGraph;

/**
 * Opaque sparsifier of a particular graph.
 */
typedef struct HsSparsifier HsSparsifier;

typedef struct {
  double target_sigma2;
  /**
   * Power-iteration steps per heat vector.
   */
  size_t t;
  /**
   * Random vectors per round; 0 picks the default.
   */
  size_t r;
  uint64_t seed;
  size_t max_rounds;
  /**
   * Total cap on recovered off-tree edges; 0 means no cap.
   */
  size_t edge_budget;
  /**
   * One of the `HsTreeKind` values.
   */
  uint32_t tree;
} HsSparsifyOptions;

typedef struct {
  size_t n;
  size_t edge_count;
  size_t offtree_edges;
  size_t rounds;
  double density;
  double lambda_max_est;
  double lambda_min_est;
  double sigma2_est;
  bool converged;
} HsSparsifierStats;

typedef struct {
  size_t iterations;
  double relative_residual;
  bool converged;
  /**
   * Mean removed from the right-hand side of a singular system.
   */
  double projected_component;
} HsSolveStats;

typedef struct {
  double balance_ratio;
  double cut_weight;
  size_t positive;
  /**
   * Rayleigh quotient of the final Fiedler estimate.
   */
  double rayleigh_quotient;
} HsPartitionStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hs_version(void);

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful call. The pointer stays valid until the next `hs_*` call on
 * the same thread.
 */
const char *hs_last_error_message(void);

/**
 * Builds a graph on `n` vertices from `m` edges `(p[i], q[i], w[i])`.
 *
 * # Safety
 * `p`, `q` and `w` must each point to `m` readable elements (or may be
 * NULL when `m` is 0). `out` must be a valid pointer to write a handle to.
 */
HsStatus hs_graph_new(size_t n,
                      const size_t *p,
                      const size_t *q,
                      const double *w,
                      size_t m,
                      HsGraph **out);

/**
 * Reads a symmetric Matrix Market file holding a Laplacian or SDD matrix.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
HsStatus hs_graph_read_mtx(const char *path, HsGraph **out);

/**
 * `rows x cols` 4-connected mesh; with `random_weights` the weights are
 * drawn from `[0.5, 1.5)` using `seed`.
 *
 * # Safety
 * `out` must be writable.
 */
HsStatus hs_graph_grid(size_t rows, size_t cols, bool random_weights, uint64_t seed, HsGraph **out);

/**
 * # Safety
 * `graph` must be NULL or a handle from this library not yet freed.
 */
void hs_graph_free(HsGraph *graph);

/**
 * Vertex count, or 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t hs_graph_vertex_count(const HsGraph *graph);

/**
 * Edge count, or 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t hs_graph_edge_count(const HsGraph *graph);

HsSparsifyOptions hs_sparsify_options_default(void);

/**
 * Builds a sparsifier of `graph`. `options` may be NULL for defaults.
 * Returns `HS_STATUS_NOT_CONVERGED` with a valid handle when the target
 * was not reached.
 *
 * # Safety
 * `graph` must be a live handle, `options` NULL or readable, `out`
 * writable.
 */
HsStatus hs_sparsify(const HsGraph *graph, const HsSparsifyOptions *options, HsSparsifier **out);

/**
 * # Safety
 * `sparsifier` must be NULL or a handle from this library not yet freed.
 */
void hs_sparsifier_free(HsSparsifier *sparsifier);

/**
 * # Safety
 * `sparsifier` must be a live handle and `out` writable.
 */
HsStatus hs_sparsifier_stats(const HsSparsifier *sparsifier, HsSparsifierStats *out);

/**
 * Writes the sparsifier Laplacian in Matrix Market format.
 *
 * # Safety
 * `sparsifier` must be a live handle and `path` a NUL-terminated string.
 */
HsStatus hs_sparsifier_write_mtx(const HsSparsifier *sparsifier, const char *path);

/**
 * Solves `L x = b` by PCG preconditioned with `sparsifier`. `x` receives
 * `n` values; `stats` may be NULL. Returns `HS_STATUS_NOT_CONVERGED` when
 * `max_iters` ran out, with `x` holding the last iterate.
 *
 * # Safety
 * Handles must be live; `b` and `x` must hold `n` elements and not
 * overlap; `stats` NULL or writable.
 */
HsStatus hs_solve(const HsGraph *graph,
                  const HsSparsifier *sparsifier,
                  const double *b,
                  double *x,
                  size_t n,
                  double rel_tol,
                  size_t max_iters,
                  HsSolveStats *stats);

/**
 * Sign-cut bipartition from `iters` inverse power iterations, with inner
 * PCG solves preconditioned by `sparsifier`. `signs` receives `n` values
 * of +1 or -1; `stats` may be NULL.
 *
 * # Safety
 * Handles must be live; `signs` must hold `n` elements; `stats` NULL or
 * writable.
 */
HsStatus hs_partition(const HsGraph *graph,
                      const HsSparsifier *sparsifier,
                      size_t iters,
                      uint64_t seed,
                      int8_t *signs,
                      size_t n,
                      HsPartitionStats *stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEATSPARSE_H */
