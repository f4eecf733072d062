/* C interface to the cosine graph-embedding library. */
#ifndef COSINE_COSINE_H
#define COSINE_COSINE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define COSINE_API __declspec(dllexport)
#else
#define COSINE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cosine_status {
  COSINE_OK = 0,
  COSINE_ERR_INVALID_ARGUMENT = 1,
  COSINE_ERR_PARSE = 2,
  COSINE_ERR_IO = 3,
  COSINE_ERR_NUMERIC = 4,
  COSINE_ERR_OUT_OF_RANGE = 5,
  COSINE_ERR_INTERNAL = 6,
  COSINE_ERR_STEP = 7 /* pipeline step failed; the message names the step */
} cosine_status;

typedef struct cosine_graph cosine_graph;
typedef struct cosine_partition cosine_partition;
typedef struct cosine_groupsets cosine_groupsets;
typedef struct cosine_model cosine_model;
typedef struct cosine_split cosine_split;
typedef struct cosine_embeddings cosine_embeddings;
typedef struct cosine_labels cosine_labels;

/* Message of the last failed call on this thread; "" after a success. */
COSINE_API const char* cosine_last_error(void);
COSINE_API const char* cosine_version(void);

/* graph */
COSINE_API cosine_status cosine_graph_load(const char* path, int directed, cosine_graph** out);
/* src/dst/weight are edge arrays of length edge_count; weight may be NULL. */
COSINE_API cosine_status cosine_graph_create(size_t node_count, const uint32_t* src, const uint32_t* dst,
                                             const double* weight, size_t edge_count, int directed,
                                             cosine_graph** out);
COSINE_API cosine_status cosine_graph_save(const cosine_graph* g, const char* path);
COSINE_API size_t cosine_graph_node_count(const cosine_graph* g);
COSINE_API size_t cosine_graph_arc_count(const cosine_graph* g);
COSINE_API void cosine_graph_free(cosine_graph* g);

/* partition */
COSINE_API cosine_status cosine_partition_compute(const cosine_graph* g, size_t groups, double epsilon, int rounds,
                                                  uint64_t seed, cosine_partition** out);
COSINE_API cosine_status cosine_partition_load(const char* path, size_t node_count, cosine_partition** out);
COSINE_API cosine_status cosine_partition_save(const cosine_partition* p, const char* path);
COSINE_API size_t cosine_partition_group_count(const cosine_partition* p);
COSINE_API uint32_t cosine_partition_group_of(const cosine_partition* p, uint32_t node);
COSINE_API cosine_status cosine_partition_quality(const cosine_graph* g, const cosine_partition* p,
                                                  double* edge_cut, double* imbalance);
COSINE_API void cosine_partition_free(cosine_partition* p);

/* group sets */
typedef struct cosine_walk_options {
  size_t walks_per_vertex;
  size_t walk_length;
  size_t set_size;
  uint64_t seed;
  size_t workers;
} cosine_walk_options;

COSINE_API void cosine_walk_options_default(cosine_walk_options* opts);
COSINE_API cosine_status cosine_groupsets_build(const cosine_graph* g, const cosine_partition* p,
                                                const cosine_walk_options* opts, cosine_groupsets** out);
COSINE_API cosine_status cosine_groupsets_load(const char* path, cosine_groupsets** out);
COSINE_API cosine_status cosine_groupsets_save(const cosine_groupsets* s, const char* path);
COSINE_API size_t cosine_groupsets_set_size(const cosine_groupsets* s);
COSINE_API size_t cosine_groupsets_group_count(const cosine_groupsets* s);
/* Copies node's set_size group ids into out. */
COSINE_API cosine_status cosine_groupsets_get(const cosine_groupsets* s, uint32_t node, uint32_t* out);
COSINE_API void cosine_groupsets_free(cosine_groupsets* s);

/* model and training */
typedef enum cosine_method { COSINE_LINE2 = 0, COSINE_DEEPWALK = 1, COSINE_NODE2VEC = 2 } cosine_method;

typedef void (*cosine_trace_fn)(uint64_t pairs, double loss, void* user);

typedef struct cosine_train_options {
  cosine_method method;
  size_t dim;
  size_t negatives;
  double epochs;
  double learning_rate;
  size_t window;
  size_t walk_length;
  size_t walks_per_vertex;
  double p;
  double q;
  size_t workers;
  uint64_t seed;
  uint64_t trace_interval;
  cosine_trace_fn trace;
  void* trace_user;
} cosine_train_options;

COSINE_API void cosine_train_options_default(cosine_train_options* opts);
COSINE_API cosine_status cosine_model_create(const cosine_groupsets* s, size_t dim, uint64_t seed,
                                             cosine_model** out);
/* Trains in place; pairs and mean_loss may be NULL. */
COSINE_API cosine_status cosine_model_train(cosine_model* m, const cosine_graph* g, const cosine_groupsets* s,
                                            const cosine_train_options* opts, uint64_t* pairs, double* mean_loss);
COSINE_API cosine_status cosine_model_save(const cosine_model* m, const char* path);
COSINE_API cosine_status cosine_model_load(const char* path, cosine_model** out);
COSINE_API size_t cosine_model_parameter_count(const cosine_model* m);
COSINE_API void cosine_model_free(cosine_model* m);

/* Lookup-table baseline trained with the same sampler. */
COSINE_API cosine_status cosine_lookup_train(const cosine_graph* g, const cosine_train_options* opts,
                                             cosine_embeddings** out);

/* embeddings */
COSINE_API cosine_status cosine_embeddings_export(const cosine_model* m, const cosine_groupsets* s,
                                                  cosine_embeddings** out);
COSINE_API cosine_status cosine_embeddings_load(const char* path, cosine_embeddings** out);
COSINE_API cosine_status cosine_embeddings_save(const cosine_embeddings* e, const char* path);
COSINE_API size_t cosine_embeddings_rows(const cosine_embeddings* e);
COSINE_API size_t cosine_embeddings_dim(const cosine_embeddings* e);
COSINE_API const double* cosine_embeddings_row(const cosine_embeddings* e, uint32_t node);
COSINE_API void cosine_embeddings_free(cosine_embeddings* e);

/* evaluation */
typedef enum cosine_score_op { COSINE_OP_L1 = 0, COSINE_OP_L2 = 1, COSINE_OP_DOT = 2 } cosine_score_op;

COSINE_API cosine_status cosine_split_create(const cosine_graph* g, double holdout, uint64_t seed,
                                             cosine_split** out);
COSINE_API cosine_status cosine_split_load(const char* path, cosine_split** out);
COSINE_API cosine_status cosine_split_save(const cosine_split* s, const char* path);
/* Borrowed view of the training graph; valid while the split lives. */
COSINE_API const cosine_graph* cosine_split_train_graph(const cosine_split* s);
COSINE_API size_t cosine_split_test_count(const cosine_split* s);
COSINE_API void cosine_split_free(cosine_split* s);

COSINE_API cosine_status cosine_eval_link(const cosine_split* s, const cosine_embeddings* e, cosine_score_op op,
                                          size_t auc_comparisons, size_t mrr_candidates, uint64_t seed,
                                          double* auc, double* mrr);

COSINE_API cosine_status cosine_labels_load(const char* path, size_t node_count, cosine_labels** out);
COSINE_API void cosine_labels_free(cosine_labels* l);
COSINE_API cosine_status cosine_eval_classify(const cosine_embeddings* e, const cosine_labels* l, double train_ratio,
                                              uint64_t seed, double* micro_f1, double* macro_f1);

/* budget: n|V| + 2d|G| against 2d'|V| */
COSINE_API void cosine_budget(size_t node_count, size_t group_count, size_t dim, size_t set_size,
                              size_t reference_dim, uint64_t* compressed, uint64_t* uncompressed, double* ratio);
COSINE_API size_t cosine_default_group_count(size_t node_count, size_t set_size, size_t dim, size_t reference_dim);

/* Runs the full pipeline from a JSON config. When report_out is non-NULL it
   receives the JSON-lines report, to be released with cosine_string_free. */
COSINE_API cosine_status cosine_pipeline_run(const char* config_json, char** report_out);
COSINE_API void cosine_string_free(char* s);

/* Routes library warnings; NULL restores printing to stderr. */
typedef void (*cosine_warning_fn)(const char* message, void* user);
COSINE_API void cosine_set_warning_handler(cosine_warning_fn fn, void* user);

#ifdef __cplusplus
}
#endif

#endif
