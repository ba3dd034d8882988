#ifndef CAUSAL_REFINE_H
#define CAUSAL_REFINE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

// Result of every fallible call.
typedef enum CrStatus {
  CR_STATUS_OK = 0,
  CR_STATUS_NULL_POINTER = 1,
  CR_STATUS_INVALID_UTF8 = 2,
  CR_STATUS_IO = 3,
  CR_STATUS_PARSE = 4,
  CR_STATUS_INVALID_ARGUMENT = 5,
  CR_STATUS_SCHEMA_MISMATCH = 6,
  CR_STATUS_NOT_A_DAG = 7,
  CR_STATUS_NOT_FULLY_ORIENTED = 8,
  CR_STATUS_CYCLE_INTRODUCED = 9,
  CR_STATUS_NO_LEGAL_EDGES = 10,
  CR_STATUS_KNOWLEDGE_VIOLATION = 11,
  CR_STATUS_BUFFER_TOO_SMALL = 12,
  CR_STATUS_PANIC = 13,
} CrStatus;

// Fitted conditionals for a graph.
typedef struct CrCpts CrCpts;

// Binary dataset with its label schema.
typedef struct CrDataset CrDataset;

// Causal graph over a label schema.
typedef struct CrGraph CrGraph;

// Message for the last failed call on this thread, or NULL. Valid until
// the next call into the library from the same thread.
const char *cr_last_error_message(void);

// # Safety
// `s` must be NULL or a string returned by this library, freed only once.
void cr_string_free(char *s);

// Loads a binary CSV dataset and its tier JSON.
//
// # Safety
// Paths must be NUL-terminated strings; `out` must be writable.
enum CrStatus cr_dataset_load(const char *csv_path, const char *tiers_path, struct CrDataset **out);

// # Safety
// `ds` must be NULL or a live dataset handle.
void cr_dataset_free(struct CrDataset *ds);

// # Safety
// `ds` must be a live dataset handle; outputs must be writable.
enum CrStatus cr_dataset_shape(const struct CrDataset *ds, size_t *n_rows, size_t *n_labels);

// Tier-constrained PC discovery with the G² test.
//
// # Safety
// `ds` must be a live dataset handle; `out` must be writable.
enum CrStatus cr_discover(const struct CrDataset *ds,
                          double alpha,
                          size_t max_cond,
                          bool allow_tier_skip,
                          bool strict,
                          struct CrGraph **out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum CrStatus cr_graph_from_json(const char *json, struct CrGraph **out);

// # Safety
// `g` must be NULL or a live graph handle.
void cr_graph_free(struct CrGraph *g);

// # Safety
// `g` must be a live graph handle; free the result with `cr_string_free`.
enum CrStatus cr_graph_to_json(const struct CrGraph *g, char **out);

// # Safety
// `g` must be a live graph handle; free the result with `cr_string_free`.
enum CrStatus cr_graph_to_dot(const struct CrGraph *g, char **out);

// # Safety
// `g` must be a live graph handle; `out` must be writable.
enum CrStatus cr_graph_is_dag(const struct CrGraph *g, bool *out);

// # Safety
// `g` must be a live graph handle; `out` must be writable.
enum CrStatus cr_graph_n_edges(const struct CrGraph *g, size_t *out);

// Fits smoothed CPTs for `g` from `ds`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum CrStatus cr_fit_cpts(const struct CrDataset *ds,
                          const struct CrGraph *g,
                          double smoothing,
                          struct CrCpts **out);

// # Safety
// `c` must be NULL or a live CPT handle.
void cr_cpts_free(struct CrCpts *c);

// # Safety
// `c` must be a live CPT handle; free the result with `cr_string_free`.
enum CrStatus cr_cpts_to_json(const struct CrCpts *c, char **out);

// Refines one belief vector of `n_labels` entries for `tau` iterations and
// writes the final beliefs to `out` (also `n_labels` entries).
//
// # Safety
// Handles must be live; `init` and `out` must hold `n_labels` doubles.
enum CrStatus cr_refine(const struct CrGraph *g,
                        const struct CrCpts *c,
                        const double *init,
                        size_t n_labels,
                        double epsilon,
                        size_t tau,
                        double *out);

// Mean-shift label selection. Writes the chosen indices (ascending) to
// `out_indices`, which must have room for `n` entries, and their count to
// `out_len`.
//
// # Safety
// `values` must hold `n` doubles and `out_indices` room for `n` entries.
enum CrStatus cr_select_labels(const double *values,
                               size_t n,
                               double bandwidth,
                               size_t *out_indices,
                               size_t *out_len);

// Set F1 between two index lists; 1 when both are empty.
//
// # Safety
// Arrays must hold the stated number of entries; `out` must be writable.
enum CrStatus cr_f_measure(const size_t *predicted,
                           size_t n_predicted,
                           const size_t *truth,
                           size_t n_truth,
                           double *out);

#endif  /* CAUSAL_REFINE_H */
