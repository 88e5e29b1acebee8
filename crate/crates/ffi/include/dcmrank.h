#ifndef DCMRANK_H
#define DCMRANK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum {
  DCM_STATUS_OK = 0,
  DCM_STATUS_NULL_POINTER = 1,
  // Bad parameters, malformed input or an index out of range.
  DCM_STATUS_INVALID_ARGUMENT = 2,
  // The output buffer is shorter than the result.
  DCM_STATUS_BUFFER_TOO_SMALL = 3,
  // The computation failed (non-subcritical law, population cap, ...).
  DCM_STATUS_RUNTIME = 4,
  // A Rust panic was caught at the boundary.
  DCM_STATUS_PANIC = 5,
} DcmStatus;

// A directed multigraph realizing a sequence.
typedef struct DcmGraph DcmGraph;

// A validated degree model (in/out-degree laws and weight laws).
typedef struct DcmModel DcmModel;

// An extended bi-degree sequence.
typedef struct DcmSequence DcmSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *dcm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dcm_version(void);

// PageRank model: zeta(`alpha`)+Poisson in-degrees, zeta(`beta`)+Poisson
// out-degrees, both with mean `target_mean`, damping `c` and `Q = 1 - c`.
//
// # Safety
// `out` must be valid for writing one pointer.
DcmStatus dcm_model_new_pagerank(double alpha,
                                 double beta,
                                 double target_mean,
                                 double c,
                                 DcmModel **out);

// Model from a JSON object with fields `alpha`, `beta`, `target_mean`,
// `damping_law`, `personalization_law` and optionally `delta0`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writing.
DcmStatus dcm_model_from_json(const char *json, DcmModel **out);

// # Safety
// `model` must be null or a handle from a model constructor, freed once.
void dcm_model_free(DcmModel *model);

// Runs the IID algorithm for `n` nodes with the given master seed.
//
// # Safety
// `model` must be a live handle; `out` must be valid for writing.
DcmStatus dcm_sequence_generate(const DcmModel *model, size_t n, uint64_t seed, DcmSequence **out);

// Sequence from caller-provided columns of length `n`.
//
// # Safety
// Each array must hold `n` elements; `out` must be valid for writing.
DcmStatus dcm_sequence_from_arrays(const uint64_t *in_degrees,
                                   const uint64_t *out_degrees,
                                   const double *weights,
                                   const double *personalization,
                                   size_t n,
                                   DcmSequence **out);

// Number of nodes, or 0 for a null handle.
//
// # Safety
// `seq` must be null or a live handle.
size_t dcm_sequence_len(const DcmSequence *seq);

// Total number of stubs on each side, or 0 for a null handle.
//
// # Safety
// `seq` must be null or a live handle.
uint64_t dcm_sequence_total_stubs(const DcmSequence *seq);

// Reads row `i`: in-degree, out-degree, weight and personalization. Any of
// the output pointers may be null to skip that field.
//
// # Safety
// `seq` must be a live handle; non-null outputs must be valid for writing.
DcmStatus dcm_sequence_get_row(const DcmSequence *seq,
                               size_t i,
                               uint64_t *in_degree,
                               uint64_t *out_degree,
                               double *weight,
                               double *personalization);

// # Safety
// `seq` must be null or a live handle, freed once.
void dcm_sequence_free(DcmSequence *seq);

// Pairs the stubs of `seq` uniformly at random. The graph keeps its own
// reference to the sequence, which may be freed afterwards.
//
// # Safety
// `seq` must be a live handle; `out` must be valid for writing.
DcmStatus dcm_graph_build(const DcmSequence *seq, uint64_t seed, DcmGraph **out);

// Number of nodes, or 0 for a null handle.
//
// # Safety
// `graph` must be null or a live handle.
size_t dcm_graph_node_count(const DcmGraph *graph);

// Number of edges, or 0 for a null handle.
//
// # Safety
// `graph` must be null or a live handle.
size_t dcm_graph_edge_count(const DcmGraph *graph);

// Copies the edges as `(sources[e], targets[e])` pairs, grouped by target.
// `capacity` is the length of both buffers.
//
// # Safety
// `graph` must be a live handle; both buffers must hold `capacity` elements.
DcmStatus dcm_graph_edges(const DcmGraph *graph,
                          uint32_t *sources,
                          uint32_t *targets,
                          size_t capacity);

// # Safety
// `graph` must be null or a live handle, freed once.
void dcm_graph_free(DcmGraph *graph);

// Generalized PageRank `R = R M + Q` by power iteration from `r0`, stopping
// when successive iterates differ by less than `tolerance` in L2 or after
// `max_k` steps. `damping_bound` is the certified `max |C_i| D_i < 1`.
// Writes `node_count` values; `iterations` and `error_bound` may be null.
//
// # Safety
// `graph` must be a live handle; `values` must hold `capacity` elements;
// non-null scalar outputs must be valid for writing.
DcmStatus dcm_pagerank(const DcmGraph *graph,
                       double damping_bound,
                       double r0,
                       double tolerance,
                       size_t max_k,
                       double *values,
                       size_t capacity,
                       size_t *iterations,
                       double *error_bound);

// Draws `count` samples of the root mixture `ℛ*` of the model's limit laws,
// each truncated at `generations`; sample `i` uses its own stream of `seed`.
//
// # Safety
// `model` must be a live handle; `out` must hold `count` elements.
DcmStatus dcm_sample_r_star(const DcmModel *model,
                            size_t count,
                            size_t generations,
                            uint64_t seed,
                            double *out);

// Kantorovich–Rubinstein (Wasserstein-1) distance between two samples.
//
// # Safety
// `a` and `b` must hold `len_a` and `len_b` elements; `out` must be valid
// for writing.
DcmStatus dcm_kr_distance(const double *a,
                          size_t len_a,
                          const double *b,
                          size_t len_b,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DCMRANK_H */
