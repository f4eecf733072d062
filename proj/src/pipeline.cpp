#include "cosine/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

namespace cosine {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// Runs one step, timing it and tagging any failure with the step name.
class StepRunner {
 public:
  StepRunner(PipelineResult& result, std::ofstream& log) : result_(result), log_(log) {}

  template <class Fn>
  void run(const std::string& step, Fn&& fn) {
    Json record{{"step", step}};
    const auto start = std::chrono::steady_clock::now();
    try {
      fn(record);
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(step, e.what());
    }
    record["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string line = record.dump();
    result_.report.push_back(line);
    log_ << line << '\n' << std::flush;
  }

 private:
  PipelineResult& result_;
  std::ofstream& log_;
};

bool reuse(const PipelineConfig& cfg, const fs::path& artifact) { return cfg.resume && fs::exists(artifact); }

template <class T>
void read_key(const Json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

PipelineConfig pipeline_config_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("pipeline config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("pipeline config must be a JSON object");
  static const std::set<std::string> known = {
      "input", "output_dir", "directed", "remap_ids", "labels", "partition_file", "groups", "epsilon", "rounds",
      "map_walks", "map_length", "set_size", "dim", "reference_dim", "method", "window", "walk_length",
      "walks_per_vertex", "p", "q", "negatives", "negative_exponent", "learning_rate", "epochs", "trace_interval",
      "holdout", "auc_comparisons", "mrr_candidates", "clf_ratio", "l2_reg", "seed", "workers", "resume"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw std::invalid_argument("unknown pipeline config key '" + key + "'");

  PipelineConfig cfg;
  try {
    read_key(j, "input", cfg.input);
    read_key(j, "output_dir", cfg.output_dir);
    read_key(j, "directed", cfg.directed);
    read_key(j, "remap_ids", cfg.remap_ids);
    read_key(j, "labels", cfg.labels);
    read_key(j, "partition_file", cfg.partition_file);
    read_key(j, "groups", cfg.groups);
    read_key(j, "epsilon", cfg.epsilon);
    read_key(j, "rounds", cfg.rounds);
    read_key(j, "map_walks", cfg.walks.walks_per_vertex);
    read_key(j, "map_length", cfg.walks.walk_length);
    read_key(j, "set_size", cfg.walks.set_size);
    read_key(j, "dim", cfg.dim);
    read_key(j, "reference_dim", cfg.reference_dim);
    if (j.contains("method")) cfg.sampler.method = parse_method(j.at("method").get<std::string>());
    read_key(j, "window", cfg.sampler.window);
    read_key(j, "walk_length", cfg.sampler.walk_length);
    read_key(j, "walks_per_vertex", cfg.sampler.walks_per_vertex);
    read_key(j, "p", cfg.sampler.p);
    read_key(j, "q", cfg.sampler.q);
    read_key(j, "negatives", cfg.sampler.negatives);
    read_key(j, "negative_exponent", cfg.sampler.negative_exponent);
    read_key(j, "learning_rate", cfg.train.learning_rate);
    read_key(j, "epochs", cfg.train.epochs);
    read_key(j, "trace_interval", cfg.train.trace_interval);
    read_key(j, "holdout", cfg.holdout);
    read_key(j, "auc_comparisons", cfg.auc_comparisons);
    read_key(j, "mrr_candidates", cfg.mrr_candidates);
    read_key(j, "clf_ratio", cfg.classify.train_ratio);
    read_key(j, "l2_reg", cfg.classify.l2_reg);
    read_key(j, "seed", cfg.seed);
    read_key(j, "workers", cfg.workers);
    read_key(j, "resume", cfg.resume);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("pipeline config: ") + e.what());
  }
  return cfg;
}

void validate(const PipelineConfig& cfg) {
  if (cfg.input.empty()) throw std::invalid_argument("pipeline: no input edge list");
  if (cfg.dim == 0) throw std::invalid_argument("pipeline: dim must be positive");
  if (cfg.walks.set_size == 0) throw std::invalid_argument("pipeline: set_size must be positive");
  if (cfg.walks.walks_per_vertex == 0) throw std::invalid_argument("pipeline: map_walks must be positive");
  if (!(cfg.epsilon >= 0)) throw std::invalid_argument("pipeline: epsilon must be >= 0");
  if (cfg.rounds < 0) throw std::invalid_argument("pipeline: rounds must be >= 0");
  if (!(cfg.holdout >= 0 && cfg.holdout < 1)) throw std::invalid_argument("pipeline: holdout must be in [0, 1)");
  if (!(cfg.classify.train_ratio > 0 && cfg.classify.train_ratio < 1))
    throw std::invalid_argument("pipeline: clf_ratio must be in (0, 1)");
  if (cfg.workers == 0) throw std::invalid_argument("pipeline: workers must be positive");
  cfg.sampler.validate();
  cfg.train.validate();
}

BudgetReport report_budget(std::size_t node_count, std::size_t group_count, std::size_t dim, std::size_t set_size,
                           std::size_t reference_dim) {
  const Budget b{dim, set_size, node_count, group_count};
  return {b.compressed(), b.uncompressed(reference_dim), b.ratio(reference_dim)};
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  try {
    validate(cfg);
  } catch (const std::exception& e) {
    throw PipelineError("config", e.what());
  }
  if (!fs::exists(cfg.input)) throw PipelineError("load", "input edge list '" + cfg.input + "' does not exist");
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  const fs::path split_path = out_dir / "split.json";
  const fs::path part_path = out_dir / "graph.part";
  const fs::path gsets_path = out_dir / "graph.gsets";
  const fs::path emb_path = out_dir / "emb.txt";

  PipelineResult result;
  std::ofstream log(out_dir / "report.jsonl", cfg.resume ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot write report in '" + cfg.output_dir + "'");
  StepRunner steps(result, log);

  LoadedGraph loaded;
  steps.run("load", [&](Json& r) {
    loaded = load_edge_list_file(cfg.input, cfg.directed, cfg.remap_ids);
    if (cfg.remap_ids) save_id_map(loaded.names, (out_dir / "graph.ids").string());
    r["nodes"] = loaded.graph.node_count();
    r["arcs"] = loaded.graph.arc_count();
  });

  std::optional<EvalSplit> split;
  if (cfg.holdout > 0) {
    steps.run("split", [&](Json& r) {
      if (reuse(cfg, split_path)) {
        split = load_split_file(split_path.string());
        r["resumed"] = true;
      } else {
        split = split_edges(loaded.graph, cfg.holdout, mix_seed(cfg.seed, 1));
        save_split_file(*split, split_path.string());
      }
      r["test_pos"] = split->test_pos.size();
    });
  }
  const Graph& graph = split ? split->train_graph : loaded.graph;
  const std::size_t n_nodes = graph.node_count();

  std::size_t groups = cfg.groups ? cfg.groups : default_group_count(n_nodes, cfg.walks.set_size, cfg.dim, cfg.reference_dim);
  Partition partition;
  steps.run("partition", [&](Json& r) {
    if (!cfg.partition_file.empty()) {
      partition = load_partition_file(cfg.partition_file, n_nodes);
      r["imported"] = cfg.partition_file;
    } else if (reuse(cfg, part_path)) {
      partition = load_partition_file(part_path.string(), n_nodes);
      r["resumed"] = true;
    } else {
      partition = partition_label_propagation(graph, groups, cfg.epsilon, cfg.rounds, mix_seed(cfg.seed, 2));
    }
    save_partition_file(partition, part_path.string());
    groups = partition.group_count;
    const auto q = partition_quality(graph, partition);
    r["groups"] = groups;
    r["edge_cut"] = q.edge_cut;
    r["imbalance"] = q.imbalance;
  });

  steps.run("budget", [&](Json& r) {
    const auto b = report_budget(n_nodes, groups, cfg.dim, cfg.walks.set_size, cfg.reference_dim);
    r["compressed_params"] = b.compressed;
    r["uncompressed_params"] = b.uncompressed;
    r["reference_dim"] = cfg.reference_dim;
    r["ratio"] = b.ratio;
  });

  GroupSetTable table;
  steps.run("groupmap", [&](Json& r) {
    if (reuse(cfg, gsets_path)) {
      table = load_group_sets_file(gsets_path.string());
      if (table.node_count() != n_nodes) throw std::runtime_error("stale group-set file");
      r["resumed"] = true;
    } else {
      WalkConfig wc = cfg.walks;
      wc.seed = mix_seed(cfg.seed, 3);
      wc.workers = cfg.workers;
      table = build_group_sets(graph, partition, wc);
      save_group_sets_file(table, gsets_path.string());
    }
    std::size_t padded = 0;
    for (NodeId v = 0; v < table.node_count(); ++v) padded += table.padding(v) > 0;
    r["padded_nodes"] = padded;
  });

  EmbeddingMatrix emb;
  steps.run("train", [&](Json& r) {
    if (reuse(cfg, emb_path)) {
      emb = load_embeddings_file(emb_path.string());
      r["resumed"] = true;
      r["pairs"] = 0;
      return;
    }
    ModelParameters params = init_model(groups, n_nodes, cfg.dim, table.set_size(), mix_seed(cfg.seed, 4), &table);
    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.seed, 5);
    tc.workers = cfg.workers;
    const auto res = train(graph, table, params, cfg.sampler, tc);
    result.trained_pairs = res.pairs;
    emb = export_embeddings(params, table);
    save_embeddings_file(emb, emb_path.string());
    r["method"] = method_name(cfg.sampler.method);
    r["pairs"] = res.pairs;
    r["mean_loss"] = res.mean_loss;
  });

  if (split) {
    steps.run("eval-lp", [&](Json& r) {
      for (ScoreOp op : {ScoreOp::dot, ScoreOp::l1, ScoreOp::l2}) {
        const double a = auc(*split, emb, op, cfg.auc_comparisons, mix_seed(cfg.seed, 6));
        const double m = mrr(*split, emb, op, cfg.mrr_candidates, mix_seed(cfg.seed, 7));
        r["auc_" + score_op_name(op)] = a;
        r["mrr_" + score_op_name(op)] = m;
        if (op == ScoreOp::dot) result.auc_dot = a;
      }
    });
  }

  if (!cfg.labels.empty()) {
    steps.run("eval-clf", [&](Json& r) {
      const LabelSet labels = load_labels_file(cfg.labels, n_nodes);
      ClassifyOptions opts = cfg.classify;
      opts.seed = mix_seed(cfg.seed, 8);
      const auto f1 = classify(emb, labels, opts);
      r["train_ratio"] = opts.train_ratio;
      r["micro_f1"] = f1.micro;
      r["macro_f1"] = f1.macro;
    });
  }
  return result;
}

}  // namespace cosine
