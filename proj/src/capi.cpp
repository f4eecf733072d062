#include "cosine/cosine.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "cosine/eval.hpp"
#include "cosine/graph.hpp"
#include "cosine/groupmap.hpp"
#include "cosine/model.hpp"
#include "cosine/partition.hpp"
#include "cosine/pipeline.hpp"
#include "cosine/trainer.hpp"

struct cosine_graph {
  std::unique_ptr<cosine::Graph> owned;
  const cosine::Graph* graph = nullptr;
};

struct cosine_partition {
  cosine::Partition partition;
};

struct cosine_groupsets {
  cosine::GroupSetTable table;
};

struct cosine_model {
  cosine::ModelParameters params;
};

struct cosine_split {
  cosine::EvalSplit split;
  cosine_graph train_view;
};

struct cosine_embeddings {
  cosine::EmbeddingMatrix emb;
};

struct cosine_labels {
  cosine::LabelSet labels;
};

namespace {

thread_local std::string last_error;

cosine_status fail(cosine_status status, const char* what) {
  last_error = what;
  return status;
}

template <class Fn>
cosine_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return COSINE_OK;
  } catch (const cosine::PipelineError& e) {
    return fail(COSINE_ERR_STEP, e.what());
  } catch (const cosine::ParseError& e) {
    return fail(COSINE_ERR_PARSE, e.what());
  } catch (const cosine::IoError& e) {
    return fail(COSINE_ERR_IO, e.what());
  } catch (const cosine::NumericError& e) {
    return fail(COSINE_ERR_NUMERIC, e.what());
  } catch (const std::out_of_range& e) {
    return fail(COSINE_ERR_OUT_OF_RANGE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(COSINE_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(COSINE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(COSINE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(COSINE_ERR_INTERNAL, "unknown error");
  }
}

template <class... Ptrs>
void require(Ptrs... ptrs) {
  if (((ptrs == nullptr) || ...)) throw std::invalid_argument("null argument");
}

cosine_graph* wrap(cosine::Graph g) {
  auto* out = new cosine_graph;
  out->owned = std::make_unique<cosine::Graph>(std::move(g));
  out->graph = out->owned.get();
  return out;
}

cosine::SamplerConfig sampler_config(const cosine_train_options& o) {
  cosine::SamplerConfig s;
  switch (o.method) {
    case COSINE_LINE2: s.method = cosine::Method::line2; break;
    case COSINE_DEEPWALK: s.method = cosine::Method::deepwalk; break;
    case COSINE_NODE2VEC: s.method = cosine::Method::node2vec; break;
    default: throw std::invalid_argument("unknown training method");
  }
  s.window = o.window;
  s.walk_length = o.walk_length;
  s.walks_per_vertex = o.walks_per_vertex;
  s.p = o.p;
  s.q = o.q;
  s.negatives = o.negatives;
  return s;
}

cosine::TrainConfig train_config(const cosine_train_options& o) {
  cosine::TrainConfig t;
  t.learning_rate = o.learning_rate;
  t.epochs = o.epochs;
  t.workers = o.workers;
  t.seed = o.seed;
  t.trace_interval = o.trace_interval;
  if (o.trace) {
    auto fn = o.trace;
    void* user = o.trace_user;
    t.on_trace = [fn, user](std::uint64_t pairs, double loss) { fn(pairs, loss, user); };
  }
  return t;
}

cosine::ScoreOp score_op(cosine_score_op op) {
  switch (op) {
    case COSINE_OP_L1: return cosine::ScoreOp::l1;
    case COSINE_OP_L2: return cosine::ScoreOp::l2;
    case COSINE_OP_DOT: return cosine::ScoreOp::dot;
  }
  throw std::invalid_argument("unknown score op");
}

}  // namespace

extern "C" {

const char* cosine_last_error(void) { return last_error.c_str(); }

const char* cosine_version(void) { return "0.1.0"; }

cosine_status cosine_graph_load(const char* path, int directed, cosine_graph** out) {
  return guarded([&] {
    require(path, out);
    *out = wrap(cosine::load_edge_list_file(path, directed != 0).graph);
  });
}

cosine_status cosine_graph_create(size_t node_count, const uint32_t* src, const uint32_t* dst, const double* weight,
                                  size_t edge_count, int directed, cosine_graph** out) {
  return guarded([&] {
    require(out);
    if (edge_count) require(src, dst);
    std::vector<cosine::Edge> edges(edge_count);
    for (size_t i = 0; i < edge_count; ++i) edges[i] = {src[i], dst[i], weight ? weight[i] : 1.0};
    *out = wrap(cosine::build_graph(node_count, edges, directed != 0));
  });
}

cosine_status cosine_graph_save(const cosine_graph* g, const char* path) {
  return guarded([&] {
    require(g, path);
    cosine::save_edge_list_file(*g->graph, path);
  });
}

size_t cosine_graph_node_count(const cosine_graph* g) { return g ? g->graph->node_count() : 0; }
size_t cosine_graph_arc_count(const cosine_graph* g) { return g ? g->graph->arc_count() : 0; }
void cosine_graph_free(cosine_graph* g) { delete g; }

cosine_status cosine_partition_compute(const cosine_graph* g, size_t groups, double epsilon, int rounds, uint64_t seed,
                                       cosine_partition** out) {
  return guarded([&] {
    require(g, out);
    *out = new cosine_partition{cosine::partition_label_propagation(*g->graph, groups, epsilon, rounds, seed)};
  });
}

cosine_status cosine_partition_load(const char* path, size_t node_count, cosine_partition** out) {
  return guarded([&] {
    require(path, out);
    *out = new cosine_partition{cosine::load_partition_file(path, node_count)};
  });
}

cosine_status cosine_partition_save(const cosine_partition* p, const char* path) {
  return guarded([&] {
    require(p, path);
    cosine::save_partition_file(p->partition, path);
  });
}

size_t cosine_partition_group_count(const cosine_partition* p) { return p ? p->partition.group_count : 0; }

uint32_t cosine_partition_group_of(const cosine_partition* p, uint32_t node) {
  if (!p || node >= p->partition.group_of.size()) return UINT32_MAX;
  return p->partition.group_of[node];
}

cosine_status cosine_partition_quality(const cosine_graph* g, const cosine_partition* p, double* edge_cut,
                                       double* imbalance) {
  return guarded([&] {
    require(g, p);
    const auto q = cosine::partition_quality(*g->graph, p->partition);
    if (edge_cut) *edge_cut = q.edge_cut;
    if (imbalance) *imbalance = q.imbalance;
  });
}

void cosine_partition_free(cosine_partition* p) { delete p; }

void cosine_walk_options_default(cosine_walk_options* opts) {
  if (!opts) return;
  const cosine::WalkConfig d;
  *opts = {d.walks_per_vertex, d.walk_length, d.set_size, d.seed, d.workers};
}

cosine_status cosine_groupsets_build(const cosine_graph* g, const cosine_partition* p, const cosine_walk_options* opts,
                                     cosine_groupsets** out) {
  return guarded([&] {
    require(g, p, out);
    cosine::WalkConfig cfg;
    if (opts) {
      cfg.walks_per_vertex = opts->walks_per_vertex;
      cfg.walk_length = opts->walk_length;
      cfg.set_size = opts->set_size;
      cfg.seed = opts->seed;
      cfg.workers = opts->workers;
    }
    *out = new cosine_groupsets{cosine::build_group_sets(*g->graph, p->partition, cfg)};
  });
}

cosine_status cosine_groupsets_load(const char* path, cosine_groupsets** out) {
  return guarded([&] {
    require(path, out);
    *out = new cosine_groupsets{cosine::load_group_sets_file(path)};
  });
}

cosine_status cosine_groupsets_save(const cosine_groupsets* s, const char* path) {
  return guarded([&] {
    require(s, path);
    cosine::save_group_sets_file(s->table, path);
  });
}

size_t cosine_groupsets_set_size(const cosine_groupsets* s) { return s ? s->table.set_size() : 0; }
size_t cosine_groupsets_group_count(const cosine_groupsets* s) { return s ? s->table.group_count() : 0; }

cosine_status cosine_groupsets_get(const cosine_groupsets* s, uint32_t node, uint32_t* out) {
  return guarded([&] {
    require(s, out);
    if (node >= s->table.node_count()) throw std::out_of_range("node " + std::to_string(node) + " out of range");
    const auto set = s->table.set(node);
    std::copy(set.begin(), set.end(), out);
  });
}

void cosine_groupsets_free(cosine_groupsets* s) { delete s; }

void cosine_train_options_default(cosine_train_options* opts) {
  if (!opts) return;
  const cosine::SamplerConfig s;
  const cosine::TrainConfig t;
  *opts = {};
  opts->method = COSINE_LINE2;
  opts->dim = 8;
  opts->negatives = s.negatives;
  opts->epochs = t.epochs;
  opts->learning_rate = t.learning_rate;
  opts->window = s.window;
  opts->walk_length = s.walk_length;
  opts->walks_per_vertex = s.walks_per_vertex;
  opts->p = s.p;
  opts->q = s.q;
  opts->workers = t.workers;
  opts->seed = t.seed;
  opts->trace_interval = t.trace_interval;
}

cosine_status cosine_model_create(const cosine_groupsets* s, size_t dim, uint64_t seed, cosine_model** out) {
  return guarded([&] {
    require(s, out);
    const auto& t = s->table;
    *out = new cosine_model{cosine::init_model(t.group_count(), t.node_count(), dim, t.set_size(), seed, &t)};
  });
}

cosine_status cosine_model_train(cosine_model* m, const cosine_graph* g, const cosine_groupsets* s,
                                 const cosine_train_options* opts, uint64_t* pairs, double* mean_loss) {
  return guarded([&] {
    require(m, g, s, opts);
    const auto res = cosine::train(*g->graph, s->table, m->params, sampler_config(*opts), train_config(*opts));
    if (pairs) *pairs = res.pairs;
    if (mean_loss) *mean_loss = res.mean_loss;
  });
}

cosine_status cosine_model_save(const cosine_model* m, const char* path) {
  return guarded([&] {
    require(m, path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cosine::IoError(std::string("cannot write '") + path + "'");
    cosine::save_checkpoint(m->params, out);
  });
}

cosine_status cosine_model_load(const char* path, cosine_model** out) {
  return guarded([&] {
    require(path, out);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cosine::IoError(std::string("cannot open checkpoint '") + path + "'");
    *out = new cosine_model{cosine::load_checkpoint(in)};
  });
}

size_t cosine_model_parameter_count(const cosine_model* m) { return m ? m->params.parameter_count() : 0; }
void cosine_model_free(cosine_model* m) { delete m; }

cosine_status cosine_lookup_train(const cosine_graph* g, const cosine_train_options* opts, cosine_embeddings** out) {
  return guarded([&] {
    require(g, opts, out);
    auto model = cosine::init_lookup(g->graph->node_count(), opts->dim, opts->seed);
    cosine::train_lookup(*g->graph, model, sampler_config(*opts), train_config(*opts));
    *out = new cosine_embeddings{cosine::lookup_embeddings(model)};
  });
}

cosine_status cosine_embeddings_export(const cosine_model* m, const cosine_groupsets* s, cosine_embeddings** out) {
  return guarded([&] {
    require(m, s, out);
    *out = new cosine_embeddings{cosine::export_embeddings(m->params, s->table)};
  });
}

cosine_status cosine_embeddings_load(const char* path, cosine_embeddings** out) {
  return guarded([&] {
    require(path, out);
    *out = new cosine_embeddings{cosine::load_embeddings_file(path)};
  });
}

cosine_status cosine_embeddings_save(const cosine_embeddings* e, const char* path) {
  return guarded([&] {
    require(e, path);
    cosine::save_embeddings_file(e->emb, path);
  });
}

size_t cosine_embeddings_rows(const cosine_embeddings* e) { return e ? e->emb.rows : 0; }
size_t cosine_embeddings_dim(const cosine_embeddings* e) { return e ? e->emb.dim : 0; }

const double* cosine_embeddings_row(const cosine_embeddings* e, uint32_t node) {
  if (!e || node >= e->emb.rows) return nullptr;
  return e->emb.row(node).data();
}

void cosine_embeddings_free(cosine_embeddings* e) { delete e; }

cosine_status cosine_split_create(const cosine_graph* g, double holdout, uint64_t seed, cosine_split** out) {
  return guarded([&] {
    require(g, out);
    auto* s = new cosine_split{cosine::split_edges(*g->graph, holdout, seed), {}};
    s->train_view.graph = &s->split.train_graph;
    *out = s;
  });
}

cosine_status cosine_split_load(const char* path, cosine_split** out) {
  return guarded([&] {
    require(path, out);
    auto* s = new cosine_split{cosine::load_split_file(path), {}};
    s->train_view.graph = &s->split.train_graph;
    *out = s;
  });
}

cosine_status cosine_split_save(const cosine_split* s, const char* path) {
  return guarded([&] {
    require(s, path);
    cosine::save_split_file(s->split, path);
  });
}

const cosine_graph* cosine_split_train_graph(const cosine_split* s) { return s ? &s->train_view : nullptr; }
size_t cosine_split_test_count(const cosine_split* s) { return s ? s->split.test_pos.size() : 0; }
void cosine_split_free(cosine_split* s) { delete s; }

cosine_status cosine_eval_link(const cosine_split* s, const cosine_embeddings* e, cosine_score_op op,
                               size_t auc_comparisons, size_t mrr_candidates, uint64_t seed, double* auc, double* mrr) {
  return guarded([&] {
    require(s, e);
    const auto o = score_op(op);
    if (auc) *auc = cosine::auc(s->split, e->emb, o, auc_comparisons, seed);
    if (mrr) *mrr = cosine::mrr(s->split, e->emb, o, mrr_candidates, cosine::mix_seed(seed, 1));
  });
}

cosine_status cosine_labels_load(const char* path, size_t node_count, cosine_labels** out) {
  return guarded([&] {
    require(path, out);
    *out = new cosine_labels{cosine::load_labels_file(path, node_count)};
  });
}

void cosine_labels_free(cosine_labels* l) { delete l; }

cosine_status cosine_eval_classify(const cosine_embeddings* e, const cosine_labels* l, double train_ratio,
                                   uint64_t seed, double* micro_f1, double* macro_f1) {
  return guarded([&] {
    require(e, l);
    cosine::ClassifyOptions opts;
    opts.train_ratio = train_ratio;
    opts.seed = seed;
    const auto f1 = cosine::classify(e->emb, l->labels, opts);
    if (micro_f1) *micro_f1 = f1.micro;
    if (macro_f1) *macro_f1 = f1.macro;
  });
}

void cosine_budget(size_t node_count, size_t group_count, size_t dim, size_t set_size, size_t reference_dim,
                   uint64_t* compressed, uint64_t* uncompressed, double* ratio) {
  const auto b = cosine::report_budget(node_count, group_count, dim, set_size, reference_dim);
  if (compressed) *compressed = b.compressed;
  if (uncompressed) *uncompressed = b.uncompressed;
  if (ratio) *ratio = b.ratio;
}

size_t cosine_default_group_count(size_t node_count, size_t set_size, size_t dim, size_t reference_dim) {
  return cosine::default_group_count(node_count, set_size, dim, reference_dim);
}

cosine_status cosine_pipeline_run(const char* config_json, char** report_out) {
  if (report_out) *report_out = nullptr;
  return guarded([&] {
    require(config_json);
    const auto result = cosine::run_pipeline(cosine::pipeline_config_from_json(config_json));
    if (!report_out) return;
    std::string text;
    for (const auto& line : result.report) text += line + '\n';
    auto* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *report_out = buf;
  });
}

void cosine_string_free(char* s) { delete[] s; }

void cosine_set_warning_handler(cosine_warning_fn fn, void* user) {
  if (!fn) {
    cosine::set_warning_handler([](const std::string& msg) { std::fprintf(stderr, "warning: %s\n", msg.c_str()); });
    return;
  }
  cosine::set_warning_handler([fn, user](const std::string& msg) { fn(msg.c_str(), user); });
}

}  // extern "C"
