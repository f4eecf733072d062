#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cosine/graph.hpp"
#include "cosine/partition.hpp"

namespace cosine {

/// Draws a neighbor of v with probability proportional to edge weight.
/// Weighted graphs keep per-node cumulative weights for binary search.
class NeighborSampler {
 public:
  explicit NeighborSampler(const Graph& g);

  const Graph& graph() const { return *graph_; }
  // Returns false when v has no out-arcs.
  bool sample(NodeId v, Rng& rng, NodeId& next) const;

 private:
  const Graph* graph_;
  std::vector<double> cumulative_;  // empty for unit-weight graphs
};

/// Weighted first-order walk. The start node is not part of the result; the
/// walk stops early at a node without out-arcs.
std::vector<NodeId> random_walk(const NeighborSampler& sampler, NodeId start, std::size_t length, Rng& rng);
std::vector<NodeId> random_walk(const Graph& g, NodeId start, std::size_t length, Rng& rng);

struct WalkConfig {
  std::size_t walks_per_vertex = 100;
  std::size_t walk_length = 5;
  std::size_t set_size = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Per-node ordered group sets. Row v holds set_size distinct group ids; the
/// last `padding[v]` entries were added by padding, not observed on walks.
class GroupSetTable {
 public:
  GroupSetTable() = default;
  GroupSetTable(std::size_t node_count, std::size_t set_size, std::size_t group_count);

  std::size_t node_count() const { return padding_.size(); }
  std::size_t set_size() const { return set_size_; }
  std::size_t group_count() const { return group_count_; }

  std::span<const GroupId> set(NodeId v) const { return {ids_.data() + std::size_t{v} * set_size_, set_size_}; }
  std::span<GroupId> set(NodeId v) { return {ids_.data() + std::size_t{v} * set_size_, set_size_}; }
  std::size_t padding(NodeId v) const { return padding_[v]; }
  void set_padding(NodeId v, std::size_t count) { padding_[v] = static_cast<std::uint32_t>(count); }
  bool is_padding(NodeId v, std::size_t slot) const { return slot >= set_size_ - padding_[v]; }

 private:
  std::size_t set_size_ = 0;
  std::size_t group_count_ = 0;
  std::vector<GroupId> ids_;
  std::vector<std::uint32_t> padding_;
};

/// Top-n group ids by count, descending; ties by ascending id. Returns fewer
/// than n entries when counts is smaller.
std::vector<GroupId> select_by_frequency(const std::map<GroupId, std::size_t>& counts, std::size_t n);

/// Called once per finished walk when recording is requested. Invoked from
/// worker threads; calls for different roots may run concurrently.
using WalkObserver = std::function<void(NodeId root, std::size_t walk_index, std::span<const NodeId> walk)>;

/// Group mapping: for every node, run walks_per_vertex walks of walk_length
/// hops, count the groups of visited nodes (revisits included, the root
/// excluded), and keep the node's own group first followed by the
/// set_size - 1 most frequent other groups. Rows short of set_size are padded
/// with the smallest unobserved ids. Each node's walks use an RNG stream
/// derived from (seed, node), so the result does not depend on workers.
///
/// Throws std::invalid_argument if set_size > group_count or any count is 0.
GroupSetTable build_group_sets(const Graph& g, const Partition& p, const WalkConfig& cfg,
                               const WalkObserver& observer = {});

/// Text format: "# cosine-groupsets n=<n> groups=<G>" header, then line i
/// holds the ids of node i, optionally followed by "# pad=<count>".
void save_group_sets(const GroupSetTable& table, std::ostream& out);
void save_group_sets_file(const GroupSetTable& table, const std::string& path);
GroupSetTable load_group_sets(std::istream& in);
GroupSetTable load_group_sets_file(const std::string& path);

}  // namespace cosine
