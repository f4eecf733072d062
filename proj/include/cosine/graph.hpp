#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cosine/common.hpp"

namespace cosine {

struct Edge {
  NodeId src;
  NodeId dst;
  double weight = 1.0;
};

/// Adjacency slice of one node. Both spans have the same length.
struct Neighbors {
  std::span<const NodeId> targets;
  std::span<const double> weights;

  std::size_t size() const { return targets.size(); }
  bool empty() const { return targets.empty(); }
};

/// Immutable CSR graph. Undirected graphs store every edge in both endpoint
/// lists; parallel edges and self-loops are kept.
class Graph {
 public:
  Graph() = default;
  // Validates the CSR invariants; throws std::invalid_argument.
  Graph(std::size_t node_count, bool directed, std::vector<std::uint64_t> offsets,
        std::vector<NodeId> targets, std::vector<double> weights);

  std::size_t node_count() const { return node_count_; }
  bool directed() const { return directed_; }
  // Number of stored arcs (2x the edge count for undirected graphs).
  std::size_t arc_count() const { return targets_.size(); }
  // True when every weight equals 1.0.
  bool unit_weights() const { return unit_weights_; }

  std::size_t out_degree(NodeId v) const;
  double weighted_degree(NodeId v) const;
  Neighbors neighbors(NodeId v) const;

  std::span<const std::uint64_t> offsets() const { return offsets_; }
  std::span<const NodeId> targets() const { return targets_; }
  std::span<const double> weights() const { return weights_; }

  // Original edges: each undirected edge once (src <= dst), every arc of a
  // directed graph. Ordered by source then adjacency position.
  std::vector<Edge> edges() const;

 private:
  void check_node(NodeId v) const;

  std::size_t node_count_ = 0;
  bool directed_ = false;
  bool unit_weights_ = true;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<NodeId> targets_;
  std::vector<double> weights_;
};

/// Builds a CSR graph from an edge sequence. Adjacency order follows input
/// order; undirected edges are inserted into both endpoint lists.
Graph build_graph(std::size_t node_count, std::span<const Edge> edges, bool directed);

/// Edge list read from text. With remap_ids, tokens are arbitrary strings and
/// `names[i]` holds the original token of dense id i; otherwise tokens must be
/// non-negative integers and names is empty.
struct LoadedGraph {
  Graph graph;
  std::vector<std::string> names;
};

/// Parses "src dst [weight]" lines. Blank lines and '#' comments are skipped.
/// Throws ParseError naming the offending line; empty input is an error.
LoadedGraph load_edge_list(std::istream& in, bool directed, bool remap_ids = false);
LoadedGraph load_edge_list_file(const std::string& path, bool directed, bool remap_ids = false);

void save_edge_list(const Graph& g, std::ostream& out);
void save_edge_list_file(const Graph& g, const std::string& path);

void save_id_map(std::span<const std::string> names, const std::string& path);

// Binary cache: "CSNE", version byte, node_count (u64), directed (u8),
// arc_count (u64), offsets (u64), targets (u32), weights (f64). Little-endian.
void save_graph_binary(const Graph& g, std::ostream& out);
Graph load_graph_binary(std::istream& in);

}  // namespace cosine
