#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cosine/graph.hpp"
#include "cosine/groupmap.hpp"

namespace cosine {

/// Vose alias table: O(n) build, O(1) draws.
class AliasTable {
 public:
  AliasTable() = default;
  // Throws std::invalid_argument on empty input, negative or non-finite
  // weights, or an all-zero weight vector.
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const { return prob_.size(); }
  std::size_t sample(Rng& rng) const;
  // Exact probability of outcome i encoded by the table.
  double probability(std::size_t i) const;

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

enum class Method { line2, deepwalk, node2vec };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct SamplerConfig {
  Method method = Method::line2;
  std::size_t window = 5;
  std::size_t walk_length = 40;      // nodes per training walk, root included
  std::size_t walks_per_vertex = 5;
  double p = 1.0;                    // node2vec return parameter
  double q = 1.0;                    // node2vec in-out parameter
  std::size_t negatives = 5;
  double negative_exponent = 0.75;

  void validate() const;
};

/// A training example: `vertex` is trained against `context`.
struct TrainingPair {
  NodeId context;
  NodeId vertex;
  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

/// LINE (second order) edge sampling: arcs drawn proportionally to weight,
/// emitted as (source, target).
class EdgeSampler {
 public:
  explicit EdgeSampler(const Graph& g);
  TrainingPair sample(Rng& rng) const;
  // Pairs per epoch: one per stored arc.
  std::size_t epoch_size() const { return sources_.size(); }

 private:
  AliasTable table_;
  std::vector<NodeId> sources_;
  std::span<const NodeId> targets_;
};

/// Seeded LINE pair stream.
class LinePairStream {
 public:
  LinePairStream(const Graph& g, std::uint64_t seed);
  TrainingPair next() { return sampler_.sample(rng_); }
  std::size_t epoch_size() const { return sampler_.epoch_size(); }

 private:
  EdgeSampler sampler_;
  Rng rng_;
};

/// Node draws with probability proportional to weighted_degree^exponent.
class NegativeSampler {
 public:
  NegativeSampler(const Graph& g, double exponent);
  NodeId sample(Rng& rng) const { return static_cast<NodeId>(table_.sample(rng)); }
  double probability(NodeId v) const { return table_.probability(v); }

 private:
  AliasTable table_;
};

/// Appends (walk[i], walk[j]) and (walk[j], walk[i]) for every i < j with
/// j - i <= window, in order of i then j.
void window_pairs(std::span<const NodeId> walk, std::size_t window, std::vector<TrainingPair>& out);
/// Number of pairs window_pairs emits for a walk of `length` nodes.
std::size_t window_pair_count(std::size_t length, std::size_t window);

/// Second-order biased walks computed on the fly. Keeps a sorted copy of the
/// adjacency for O(log d) neighbor tests.
class Node2VecWalker {
 public:
  Node2VecWalker(const Graph& g, double p, double q);

  // Unnormalized transition weights from `current` given the previous node.
  std::vector<std::pair<NodeId, double>> transition_weights(NodeId previous, NodeId current) const;
  // Walk of up to `length` nodes starting with `start`.
  std::vector<NodeId> walk(NodeId start, std::size_t length, Rng& rng) const;
  bool adjacent(NodeId a, NodeId b) const;

 private:
  const Graph* graph_;
  NeighborSampler first_step_;
  double inv_p_;
  double inv_q_;
  std::vector<NodeId> sorted_targets_;
};

/// Training walks: walks_per_vertex passes over a per-pass shuffled node
/// order. Walk i is generated from an RNG stream derived from (seed, i), so
/// any subset can be regenerated independently and in any order.
class WalkCorpus {
 public:
  WalkCorpus(const Graph& g, const SamplerConfig& cfg, std::uint64_t seed);
  // Wraps walks read from disk.
  explicit WalkCorpus(std::vector<std::vector<NodeId>> walks);

  std::size_t size() const { return total_; }
  NodeId root(std::size_t i) const;
  std::vector<NodeId> walk(std::size_t i) const;

 private:
  const Graph* graph_ = nullptr;
  SamplerConfig cfg_;
  std::uint64_t seed_ = 0;
  std::size_t total_ = 0;
  std::vector<NodeId> roots_;
  std::optional<NeighborSampler> first_order_;
  std::optional<Node2VecWalker> second_order_;
  std::vector<std::vector<NodeId>> stored_;
};

/// One walk per line, node ids separated by spaces.
void save_walks(const WalkCorpus& corpus, std::ostream& out);
WalkCorpus load_walks(std::istream& in);

/// Windowed co-occurrence pairs over the first `walk_limit` walks of a corpus
/// (the whole corpus when walk_limit is 0).
class WalkPairStream {
 public:
  WalkPairStream(const WalkCorpus& corpus, std::size_t window, std::size_t walk_limit = 0);
  // Returns false when the stream is exhausted.
  bool next(TrainingPair& pair);

 private:
  const WalkCorpus* corpus_;
  std::size_t window_;
  std::size_t limit_;
  std::size_t next_walk_ = 0;
  std::vector<TrainingPair> buffer_;
  std::size_t pos_ = 0;
};

}  // namespace cosine
