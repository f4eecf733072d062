#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosine/eval.hpp"
#include "cosine/groupmap.hpp"
#include "cosine/model.hpp"
#include "cosine/sampler.hpp"
#include "cosine/trainer.hpp"

namespace cosine {

/// Failure inside a pipeline step; what() starts with the step name.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string step, const std::string& what)
      : std::runtime_error(step + ": " + what), step_(std::move(step)) {}
  const std::string& step() const noexcept { return step_; }

 private:
  std::string step_;
};

struct PipelineConfig {
  std::string input;
  std::string output_dir = ".";
  bool directed = false;
  bool remap_ids = false;
  std::string labels;          // optional; enables classification
  std::string partition_file;  // optional external partition

  std::size_t groups = 0;  // 0: derive from the budget rule
  double epsilon = 0.05;
  int rounds = 25;

  WalkConfig walks;  // group-mapping walks (gamma, k, n)
  std::size_t dim = 8;
  std::size_t reference_dim = 100;
  SamplerConfig sampler;
  TrainConfig train;

  double holdout = 0.1;  // 0 disables link prediction
  std::size_t auc_comparisons = 1000000;
  std::size_t mrr_candidates = 100;
  ClassifyOptions classify;

  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool resume = false;
};

struct BudgetReport {
  std::uint64_t compressed = 0;
  std::uint64_t uncompressed = 0;
  double ratio = 0;
};

/// Flat JSON object; keys not given keep their defaults, unknown keys throw
/// std::invalid_argument. Keys: input, output_dir, directed, remap_ids,
/// labels, partition_file, groups, epsilon, rounds, map_walks, map_length,
/// set_size, dim, reference_dim, method, window, walk_length,
/// walks_per_vertex, p, q, negatives, negative_exponent, learning_rate,
/// epochs, trace_interval, holdout, auc_comparisons, mrr_candidates,
/// clf_ratio, l2_reg, seed, workers, resume.
PipelineConfig pipeline_config_from_json(const std::string& text);
/// Throws std::invalid_argument when a sub-config is out of range.
void validate(const PipelineConfig& cfg);

/// n|V| + 2d|G| against 2d'|V| for reference dimension d'.
BudgetReport report_budget(std::size_t node_count, std::size_t group_count, std::size_t dim, std::size_t set_size,
                           std::size_t reference_dim);

struct PipelineResult {
  std::vector<std::string> report;  // JSON lines, one per step
  std::uint64_t trained_pairs = 0;
  std::optional<double> auc_dot;
};

/// partition -> groupmap -> train -> export -> evaluate. Artifacts land in
/// output_dir (graph.part, graph.gsets, emb.txt, split.json, report.jsonl);
/// with resume set, a step whose artifact exists is loaded instead of rerun.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace cosine
