// Command-line front end over the C API.
#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cosine/cosine.h"
#include "json.hpp"

namespace {

struct CliError : std::runtime_error {
  cosine_status status;
  CliError(cosine_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(cosine_status s) {
  if (s != COSINE_OK) throw CliError(s, cosine_last_error());
}

// Owning wrapper for a C handle.
template <class T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Graph = Handle<cosine_graph, cosine_graph_free>;
using Partition = Handle<cosine_partition, cosine_partition_free>;
using GroupSets = Handle<cosine_groupsets, cosine_groupsets_free>;
using Model = Handle<cosine_model, cosine_model_free>;
using Split = Handle<cosine_split, cosine_split_free>;
using Embeddings = Handle<cosine_embeddings, cosine_embeddings_free>;
using Labels = Handle<cosine_labels, cosine_labels_free>;

struct Globals {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

cosine_method parse_method(const std::string& m) {
  if (m == "line2") return COSINE_LINE2;
  if (m == "deepwalk") return COSINE_DEEPWALK;
  if (m == "node2vec") return COSINE_NODE2VEC;
  throw CLI::ValidationError("--method", "expected line2, deepwalk or node2vec");
}

cosine_score_op parse_op(const std::string& op) {
  if (op == "dot") return COSINE_OP_DOT;
  if (op == "l1") return COSINE_OP_L1;
  if (op == "l2") return COSINE_OP_L2;
  throw CLI::ValidationError("--op", "expected dot, l1 or l2");
}

void print_trace(std::uint64_t pairs, double loss, void*) {
  std::fprintf(stderr, "pairs=%" PRIu64 " loss=%.6f\n", pairs, loss);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cosine: compressed network embedding via group-shared parameters"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file; command-line flags take precedence");
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  // partition
  auto* part = app.add_subcommand("partition", "Size-constrained label-propagation partition");
  std::string p_input, p_output = "g.part";
  std::size_t p_groups = 0;
  double p_eps = 0.05;
  int p_rounds = 25;
  bool directed = false;
  part->add_option("--input", p_input, "Edge list")->required()->check(CLI::ExistingFile);
  part->add_option("--groups", p_groups, "Group count (0: budget rule)")->capture_default_str();
  part->add_option("--epsilon", p_eps, "Balance slack")->capture_default_str();
  part->add_option("--rounds", p_rounds, "Maximum rounds")->capture_default_str();
  part->add_option("--output", p_output, "Partition file")->capture_default_str();
  part->add_flag("--directed", directed, "Treat edges as directed");
  std::size_t p_set_size = 5, p_dim = 8;
  part->add_option("--set-size", p_set_size, "Group-set size for the budget rule")->capture_default_str();
  part->add_option("--dim", p_dim, "Embedding dimension for the budget rule")->capture_default_str();

  // groupmap
  auto* gmap = app.add_subcommand("groupmap", "Map every node to its group set");
  std::string m_input, m_partition, m_output = "g.gsets";
  cosine_walk_options wopts;
  cosine_walk_options_default(&wopts);
  gmap->add_option("--input", m_input, "Edge list")->required()->check(CLI::ExistingFile);
  gmap->add_option("--partition", m_partition, "Partition file")->required()->check(CLI::ExistingFile);
  gmap->add_option("--walks", wopts.walks_per_vertex, "Walks per node")->capture_default_str();
  gmap->add_option("--length", wopts.walk_length, "Walk length")->capture_default_str();
  gmap->add_option("--set-size", wopts.set_size, "Groups per node")->capture_default_str();
  gmap->add_option("--output", m_output, "Group-set file")->capture_default_str();
  gmap->add_flag("--directed", directed, "Treat edges as directed");

  // train
  auto* trn = app.add_subcommand("train", "Train the compressed model and export embeddings");
  std::string t_input, t_gsets, t_output = "emb.txt", t_method = "line2", t_checkpoint;
  cosine_train_options topts;
  cosine_train_options_default(&topts);
  bool t_lookup = false;
  trn->add_option("--method", t_method, "line2|deepwalk|node2vec")->capture_default_str();
  trn->add_option("--input", t_input, "Edge list")->required()->check(CLI::ExistingFile);
  trn->add_option("--gsets", t_gsets, "Group-set file")->check(CLI::ExistingFile);
  trn->add_option("--dim", topts.dim, "Embedding dimension")->capture_default_str();
  trn->add_option("--negatives", topts.negatives, "Negative samples per pair")->capture_default_str();
  trn->add_option("--epochs", topts.epochs, "Passes over the sample budget")->capture_default_str();
  trn->add_option("--lr", topts.learning_rate, "Initial learning rate")->capture_default_str();
  trn->add_option("--window", topts.window, "Skip-gram window")->capture_default_str();
  trn->add_option("--walk-length", topts.walk_length, "Training walk length")->capture_default_str();
  trn->add_option("--walks-per-vertex", topts.walks_per_vertex, "Training walks per node")->capture_default_str();
  trn->add_option("--p", topts.p, "node2vec return parameter")->capture_default_str();
  trn->add_option("--q", topts.q, "node2vec in-out parameter")->capture_default_str();
  trn->add_option("--trace-interval", topts.trace_interval, "Pairs between loss reports")->capture_default_str();
  trn->add_option("--output", t_output, "Embedding file")->capture_default_str();
  trn->add_option("--checkpoint", t_checkpoint, "Also write the model parameters here");
  trn->add_flag("--lookup", t_lookup, "Train the plain lookup-table baseline instead");
  trn->add_flag("--directed", directed, "Treat edges as directed");

  // split
  auto* spl = app.add_subcommand("split", "Hold out edges for link prediction");
  std::string s_input, s_output = "split.json", s_train;
  double s_ratio = 0.1;
  spl->add_option("--input", s_input, "Edge list")->required()->check(CLI::ExistingFile);
  spl->add_option("--ratio", s_ratio, "Held-out share of edges")->capture_default_str();
  spl->add_option("--output", s_output, "Split file")->capture_default_str();
  spl->add_option("--train-output", s_train, "Also write the training graph as an edge list");
  spl->add_flag("--directed", directed, "Treat edges as directed");

  // eval-lp
  auto* elp = app.add_subcommand("eval-lp", "Link-prediction AUC and MRR");
  std::string l_emb, l_split, l_op = "dot";
  std::size_t l_comparisons = 1000000, l_candidates = 100;
  elp->add_option("--emb", l_emb, "Embedding file")->required()->check(CLI::ExistingFile);
  elp->add_option("--split", l_split, "Split file")->required()->check(CLI::ExistingFile);
  elp->add_option("--op", l_op, "dot|l1|l2")->capture_default_str();
  elp->add_option("--comparisons", l_comparisons, "Sampled AUC comparisons")->capture_default_str();
  elp->add_option("--candidates", l_candidates, "MRR candidates per query")->capture_default_str();

  // eval-clf
  auto* ecl = app.add_subcommand("eval-clf", "Multi-label node classification");
  std::string c_emb, c_labels;
  double c_ratio = 0.1;
  ecl->add_option("--emb", c_emb, "Embedding file")->required()->check(CLI::ExistingFile);
  ecl->add_option("--labels", c_labels, "Label file")->required()->check(CLI::ExistingFile);
  ecl->add_option("--ratio", c_ratio, "Training share of labeled nodes")->capture_default_str();

  // budget
  auto* bud = app.add_subcommand("budget", "Parameter counts of compressed vs lookup models");
  std::size_t b_nodes = 0, b_groups = 0, b_dim = 8, b_set = 5, b_ref = 100;
  bud->add_option("--nodes", b_nodes, "|V|")->required();
  bud->add_option("--groups", b_groups, "|G| (0: budget rule)")->capture_default_str();
  bud->add_option("--dim", b_dim, "d")->capture_default_str();
  bud->add_option("--set-size", b_set, "n")->capture_default_str();
  bud->add_option("--reference-dim", b_ref, "d' of the lookup model")->capture_default_str();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "partition -> groupmap -> train -> export -> evaluate");
  std::string q_input, q_out = "run", q_labels, q_partition, q_method = "line2";
  std::size_t q_groups = 0, q_map_walks = 100, q_map_length = 5, q_set = 5, q_dim = 8, q_ref = 100, q_window = 5,
              q_walk_length = 40, q_wpv = 5, q_neg = 5;
  double q_eps = 0.05, q_p = 1, q_q = 1, q_lr = 0.025, q_epochs = 1, q_holdout = 0.1, q_clf = 0.1;
  int q_rounds = 25;
  bool q_resume = false, q_remap = false;
  pipe->add_option("--input", q_input, "Edge list")->required();
  pipe->add_option("--output-dir", q_out, "Artifact directory")->capture_default_str();
  pipe->add_option("--labels", q_labels, "Label file; enables classification");
  pipe->add_option("--partition", q_partition, "Use this partition instead of computing one");
  pipe->add_option("--groups", q_groups, "Group count (0: budget rule)")->capture_default_str();
  pipe->add_option("--epsilon", q_eps, "Balance slack")->capture_default_str();
  pipe->add_option("--rounds", q_rounds, "Partition rounds")->capture_default_str();
  pipe->add_option("--map-walks", q_map_walks, "Group-mapping walks per node")->capture_default_str();
  pipe->add_option("--map-length", q_map_length, "Group-mapping walk length")->capture_default_str();
  pipe->add_option("--set-size", q_set, "Groups per node")->capture_default_str();
  pipe->add_option("--dim", q_dim, "Embedding dimension")->capture_default_str();
  pipe->add_option("--reference-dim", q_ref, "Lookup dimension for the budget report")->capture_default_str();
  pipe->add_option("--method", q_method, "line2|deepwalk|node2vec")->capture_default_str();
  pipe->add_option("--window", q_window, "Skip-gram window")->capture_default_str();
  pipe->add_option("--walk-length", q_walk_length, "Training walk length")->capture_default_str();
  pipe->add_option("--walks-per-vertex", q_wpv, "Training walks per node")->capture_default_str();
  pipe->add_option("--p", q_p, "node2vec return parameter")->capture_default_str();
  pipe->add_option("--q", q_q, "node2vec in-out parameter")->capture_default_str();
  pipe->add_option("--negatives", q_neg, "Negative samples per pair")->capture_default_str();
  pipe->add_option("--lr", q_lr, "Initial learning rate")->capture_default_str();
  pipe->add_option("--epochs", q_epochs, "Passes over the sample budget")->capture_default_str();
  pipe->add_option("--holdout", q_holdout, "Held-out edge share (0: no link prediction)")->capture_default_str();
  pipe->add_option("--clf-ratio", q_clf, "Classification training share")->capture_default_str();
  pipe->add_flag("--resume", q_resume, "Reuse artifacts already on disk");
  pipe->add_flag("--directed", directed, "Treat edges as directed");
  pipe->add_flag("--remap-ids", q_remap, "Map arbitrary node tokens to dense ids (writes graph.ids)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*part) {
      Graph graph;
      check(cosine_graph_load(p_input.c_str(), directed, graph.out()));
      std::size_t k = p_groups;
      if (k == 0) k = cosine_default_group_count(cosine_graph_node_count(graph.get()), p_set_size, p_dim, 100);
      Partition p;
      check(cosine_partition_compute(graph.get(), k, p_eps, p_rounds, g.seed, p.out()));
      check(cosine_partition_save(p.get(), p_output.c_str()));
      double cut = 0, imbalance = 0;
      check(cosine_partition_quality(graph.get(), p.get(), &cut, &imbalance));
      std::printf("groups=%zu edge_cut=%.6g imbalance=%.4f\n", cosine_partition_group_count(p.get()), cut, imbalance);
    } else if (*gmap) {
      Graph graph;
      check(cosine_graph_load(m_input.c_str(), directed, graph.out()));
      Partition p;
      check(cosine_partition_load(m_partition.c_str(), cosine_graph_node_count(graph.get()), p.out()));
      wopts.seed = g.seed;
      wopts.workers = g.workers;
      GroupSets sets;
      check(cosine_groupsets_build(graph.get(), p.get(), &wopts, sets.out()));
      check(cosine_groupsets_save(sets.get(), m_output.c_str()));
    } else if (*trn) {
      topts.method = parse_method(t_method);
      topts.seed = g.seed;
      topts.workers = g.workers;
      topts.trace = print_trace;
      Graph graph;
      check(cosine_graph_load(t_input.c_str(), directed, graph.out()));
      Embeddings emb;
      if (t_lookup) {
        check(cosine_lookup_train(graph.get(), &topts, emb.out()));
      } else {
        if (t_gsets.empty()) throw CLI::RequiredError("--gsets");
        GroupSets sets;
        check(cosine_groupsets_load(t_gsets.c_str(), sets.out()));
        Model model;
        check(cosine_model_create(sets.get(), topts.dim, g.seed, model.out()));
        std::uint64_t pairs = 0;
        double loss = 0;
        check(cosine_model_train(model.get(), graph.get(), sets.get(), &topts, &pairs, &loss));
        std::fprintf(stderr, "trained pairs=%" PRIu64 " mean_loss=%.6f\n", pairs, loss);
        if (!t_checkpoint.empty()) check(cosine_model_save(model.get(), t_checkpoint.c_str()));
        check(cosine_embeddings_export(model.get(), sets.get(), emb.out()));
      }
      check(cosine_embeddings_save(emb.get(), t_output.c_str()));
    } else if (*spl) {
      Graph graph;
      check(cosine_graph_load(s_input.c_str(), directed, graph.out()));
      Split split;
      check(cosine_split_create(graph.get(), s_ratio, g.seed, split.out()));
      check(cosine_split_save(split.get(), s_output.c_str()));
      if (!s_train.empty()) check(cosine_graph_save(cosine_split_train_graph(split.get()), s_train.c_str()));
      std::printf("test_pos=%zu\n", cosine_split_test_count(split.get()));
    } else if (*elp) {
      Embeddings emb;
      check(cosine_embeddings_load(l_emb.c_str(), emb.out()));
      Split split;
      check(cosine_split_load(l_split.c_str(), split.out()));
      double auc = 0, mrr = 0;
      check(cosine_eval_link(split.get(), emb.get(), parse_op(l_op), l_comparisons, l_candidates, g.seed, &auc, &mrr));
      std::printf("op=%s auc=%.6f mrr=%.6f\n", l_op.c_str(), auc, mrr);
    } else if (*ecl) {
      Embeddings emb;
      check(cosine_embeddings_load(c_emb.c_str(), emb.out()));
      Labels labels;
      check(cosine_labels_load(c_labels.c_str(), cosine_embeddings_rows(emb.get()), labels.out()));
      double micro = 0, macro = 0;
      check(cosine_eval_classify(emb.get(), labels.get(), c_ratio, g.seed, &micro, &macro));
      std::printf("micro_f1=%.6f macro_f1=%.6f\n", micro, macro);
    } else if (*bud) {
      std::size_t k = b_groups ? b_groups : cosine_default_group_count(b_nodes, b_set, b_dim, b_ref);
      std::uint64_t compressed = 0, uncompressed = 0;
      double ratio = 0;
      cosine_budget(b_nodes, k, b_dim, b_set, b_ref, &compressed, &uncompressed, &ratio);
      std::printf("groups=%zu compressed=%" PRIu64 " uncompressed=%" PRIu64 " ratio=%.6g\n", k, compressed,
                  uncompressed, ratio);
    } else if (*pipe) {
      const nlohmann::json pj = {{"input", q_input},
            {"output_dir", q_out},
            {"directed", directed},
            {"remap_ids", q_remap},
            {"labels", q_labels},
            {"partition_file", q_partition},
            {"groups", q_groups},
            {"epsilon", q_eps},
            {"rounds", q_rounds},
            {"map_walks", q_map_walks},
            {"map_length", q_map_length},
            {"set_size", q_set},
            {"dim", q_dim},
            {"reference_dim", q_ref},
            {"method", q_method},
            {"window", q_window},
            {"walk_length", q_walk_length},
            {"walks_per_vertex", q_wpv},
            {"p", q_p},
            {"q", q_q},
            {"negatives", q_neg},
            {"learning_rate", q_lr},
            {"epochs", q_epochs},
            {"holdout", q_holdout},
            {"clf_ratio", q_clf},
            {"seed", g.seed},
            {"workers", g.workers},
            {"resume", q_resume}};
      char* report = nullptr;
      check(cosine_pipeline_run(pj.dump().c_str(), &report));
      std::fputs(report, stdout);
      cosine_string_free(report);
    }
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.status);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
  return 0;
}
