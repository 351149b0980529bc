#ifndef QAOA_RL_H
#define QAOA_RL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Optimizer selector for [`qr_optimize`].
 */
typedef enum QrOptimizer {
  QR_OPTIMIZER_NELDER_MEAD = 0,
  QR_OPTIMIZER_RL = 1,
  QR_OPTIMIZER_RLNM = 2,
} QrOptimizer;

/**
 * Result codes of the C interface.
 */
typedef enum QrStatus {
  QR_STATUS_OK = 0,
  QR_STATUS_NULL_POINTER = 1,
  QR_STATUS_INVALID_ARGUMENT = 2,
  QR_STATUS_CAPACITY = 3,
  QR_STATUS_DIMENSION_MISMATCH = 4,
  QR_STATUS_BUDGET_EXHAUSTED = 5,
  QR_STATUS_PARSE = 6,
  QR_STATUS_SHAPE_MISMATCH = 7,
  QR_STATUS_IO = 8,
  QR_STATUS_NON_FINITE = 9,
  QR_STATUS_INTERNAL = 10,
} QrStatus;

/**
 * Trained policy checkpoint.
 */
typedef struct QrCheckpoint QrCheckpoint;

/**
 * Cut-value diagonal of a graph, ready for simulation.
 */
typedef struct QrDiagonal QrDiagonal;

/**
 * Undirected graph.
 */
typedef struct QrGraph QrGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *qr_last_error(void);

/**
 * Erdos-Renyi graph on `n` vertices with edge probability `edge_prob`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QrStatus qr_graph_erdos_renyi(size_t n, double edge_prob, uint64_t seed, struct QrGraph **out);

/**
 * Ladder with `len` rungs.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QrStatus qr_graph_ladder(size_t len, struct QrGraph **out);

/**
 * Two `K_clique` joined by one edge.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QrStatus qr_graph_barbell(size_t clique, struct QrGraph **out);

/**
 * Connected caveman graph of `cliques` cliques of `size` vertices.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QrStatus qr_graph_caveman(size_t cliques, size_t size, struct QrGraph **out);

/**
 * Parses the canonical text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum QrStatus qr_graph_parse(const char *text, struct QrGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from this library that has not been freed.
 */
void qr_graph_free(struct QrGraph *g);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t qr_graph_num_vertices(const struct QrGraph *g);

/**
 * Edge count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t qr_graph_num_edges(const struct QrGraph *g);

/**
 * Exact maximum cut. `assignment` receives one 0/1 side per vertex and
 * must hold `assignment_len >= n` bytes; it may be null when `assignment_len` is 0.
 *
 * # Safety
 * `g` must be a live graph handle, `value` writable, `assignment` valid for `assignment_len` bytes.
 */
enum QrStatus qr_graph_maxcut(const struct QrGraph *g,
                              size_t *value,
                              uint8_t *assignment,
                              size_t assignment_len);

/**
 * # Safety
 * `g` must be a live graph handle and `out` writable.
 */
enum QrStatus qr_diagonal_new(const struct QrGraph *g, struct QrDiagonal **out);

/**
 * # Safety
 * `d` must be null or a diagonal handle that has not been freed.
 */
void qr_diagonal_free(struct QrDiagonal *d);

/**
 * Expected cut of the depth-`p` circuit with angles `beta[0..p]`, `gamma[0..p]`.
 *
 * # Safety
 * `d` must be a live diagonal handle, `beta` and `gamma` valid for `p`
 * reads, `f` writable.
 */
enum QrStatus qr_expected_cut(const struct QrDiagonal *d,
                              const double *beta,
                              const double *gamma,
                              size_t p,
                              double *f);

/**
 * Loads a checkpoint JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum QrStatus qr_checkpoint_load(const char *path, struct QrCheckpoint **out);

/**
 * # Safety
 * `ck` must be null or a checkpoint handle that has not been freed.
 */
void qr_checkpoint_free(struct QrCheckpoint *ck);

/**
 * Circuit depth the checkpoint acts on, or 0 for a null handle.
 *
 * # Safety
 * `ck` must be null or a live checkpoint handle.
 */
size_t qr_checkpoint_p(const struct QrCheckpoint *ck);

/**
 * Maximizes the depth-`p` expected cut from `x0 = [beta.., gamma..]`
 * (`2p` values) using at most `budget` circuit evaluations. The policy
 * optimizers need a checkpoint; Nelder-Mead ignores it (may be null).
 * On success `best_params` (room for `2p` values) and `best_f` hold the best point seen.
 *
 * # Safety
 * Handles must be live or null as described; `x0` and `best_params` valid
 * for `2p` elements; `best_f` writable.
 */
enum QrStatus qr_optimize(enum QrOptimizer method,
                          const struct QrCheckpoint *ck,
                          const struct QrDiagonal *d,
                          size_t p,
                          const double *x0,
                          size_t budget,
                          double *best_params,
                          double *best_f);

/**
 * Resets the last error message of this thread.
 */
void qr_clear_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QAOA_RL_H */
