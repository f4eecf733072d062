#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cosine/graph.hpp"
#include "cosine/model.hpp"

namespace cosine {

/// Link-prediction holdout. test_neg pairs are non-edges of the original graph.
struct EvalSplit {
  Graph train_graph;
  std::vector<std::pair<NodeId, NodeId>> test_pos;
  std::vector<std::pair<NodeId, NodeId>> test_neg;
  std::uint64_t seed = 0;
};

/// Removes round(ratio * |E|) uniformly chosen edges and pairs them with as
/// many uniform non-edges (u != v) found by rejection sampling, giving up
/// after 100 * |test_pos| attempts. Throws std::invalid_argument on a bad
/// ratio or an empty holdout, std::runtime_error when non-edges run out.
EvalSplit split_edges(const Graph& g, double holdout_ratio, std::uint64_t seed);

/// JSON: {"node_count", "directed", "seed", "train_edges": [[u,v,w]...],
/// "test_pos": [[u,v]...], "test_neg": [[u,v]...]}.
void save_split(const EvalSplit& split, std::ostream& out);
void save_split_file(const EvalSplit& split, const std::string& path);
EvalSplit load_split(std::istream& in);
EvalSplit load_split_file(const std::string& path);

enum class ScoreOp { l1, l2, dot };
ScoreOp parse_score_op(const std::string& name);
std::string score_op_name(ScoreOp op);

/// Similarity where larger is closer for every op: dot product, or the
/// negated L1 / L2 distance. Throws std::invalid_argument on a dim mismatch.
double pair_score(std::span<const double> a, std::span<const double> b, ScoreOp op);

/// (wins + 0.5 ties) / comparisons over uniformly drawn (pos, neg) pairs.
double auc_from_scores(std::span<const double> pos, std::span<const double> neg, std::size_t comparisons,
                       std::uint64_t seed);
/// Same estimator over every (pos, neg) pair.
double auc_exhaustive(std::span<const double> pos, std::span<const double> neg);

double auc(const EvalSplit& split, const EmbeddingMatrix& emb, ScoreOp op, std::size_t comparisons,
           std::uint64_t seed);

/// 1 / rank of the true score among candidates; rank 1 is best and ties take
/// the mean of the tied ranks.
double reciprocal_rank(double true_score, std::span<const double> candidate_scores);

/// For every held-out edge (h, t), ranks score(h, t) against
/// candidates_per_query tails drawn uniformly among nodes that are neither h
/// nor an out-neighbor of h in the original graph.
double mrr(const EvalSplit& split, const EmbeddingMatrix& emb, ScoreOp op, std::size_t candidates_per_query,
           std::uint64_t seed);

/// Multi-label node annotations.
struct LabelSet {
  std::vector<std::vector<std::uint32_t>> labels;  // per node, sorted, unique
  std::size_t label_count = 0;
};

/// "node_id label_id" per line; a node may appear on several lines.
LabelSet load_labels(std::istream& in, std::size_t node_count);
LabelSet load_labels_file(const std::string& path, std::size_t node_count);

struct F1Scores {
  double micro = 0;
  double macro = 0;
};

/// Micro F1 pools counts across all labels; macro F1 averages per-label F1 over
/// the labels in `macro_labels` (all labels when empty). A label with no
/// true or predicted positives contributes 0.
F1Scores f1_scores(std::span<const std::vector<std::uint32_t>> truth,
                   std::span<const std::vector<std::uint32_t>> predicted, std::size_t label_count,
                   std::span<const std::uint32_t> macro_labels = {});

struct ClassifyOptions {
  double train_ratio = 0.1;
  double l2_reg = 1e-4;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 500;
  double tolerance = 1e-6;
};

/// One-vs-rest L2-regularized logistic regression trained by full-batch
/// gradient descent on a train_ratio share of the labeled nodes. Each test
/// node gets its top-k scored labels, k = its true label count. Labels
/// without positive training examples are left out of the macro average.
F1Scores classify(const EmbeddingMatrix& emb, const LabelSet& labels, const ClassifyOptions& opts);

}  // namespace cosine
