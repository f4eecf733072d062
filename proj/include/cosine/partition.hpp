#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cosine/graph.hpp"

namespace cosine {

/// One group per node; every id in [0, group_count) is used.
struct Partition {
  std::vector<GroupId> group_of;
  std::size_t group_count = 0;

  std::vector<std::size_t> group_sizes() const;
};

struct PartitionQuality {
  double edge_cut = 0;   // each undirected edge counted once
  double imbalance = 0;  // max group size / ceil(node_count / k)
};

/// Label-propagation state after a round (round 0 is the initial assignment).
struct RoundInfo {
  int round = 0;
  std::size_t moves = 0;
  const Partition& partition;
};
using RoundObserver = std::function<void(const RoundInfo&)>;

/// Size cap used by the partitioner: floor((1 + epsilon) * ceil(n / k)).
std::size_t group_size_cap(std::size_t node_count, std::size_t k, double epsilon);

/// Size-constrained label propagation.
///
/// Nodes are first dealt into k groups after a seeded shuffle, then visited
/// in a per-round shuffled order. A node moves to the neighboring group with
/// the largest incident edge weight (both arc directions for directed
/// graphs) when that weight strictly exceeds the weight to its current group,
/// the target has room under the cap, and the move would not empty its
/// current group. Ties go to the smallest group id. A node whose preferred
/// group is full is remembered for the round; when a node of that group later
/// prefers the first node's group, the two swap if the swap strictly lowers
/// the cut. The cut is therefore non-increasing across rounds and sizes never
/// exceed the cap. Stops after max_rounds or at the first round without moves.
///
/// Throws std::invalid_argument unless 1 <= k <= node_count, epsilon >= 0 and
/// max_rounds >= 1.
Partition partition_label_propagation(const Graph& g, std::size_t k, double epsilon, int max_rounds,
                                      std::uint64_t seed, const RoundObserver& observer = {});

/// Reads one group id per line (line i = node i). Unused ids are compacted
/// away with a warning. Throws ParseError on bad lines or a count mismatch.
Partition load_partition(std::istream& in, std::size_t node_count);
Partition load_partition_file(const std::string& path, std::size_t node_count);
void save_partition(const Partition& p, std::ostream& out);
void save_partition_file(const Partition& p, const std::string& path);

PartitionQuality partition_quality(const Graph& g, const Partition& p);

}  // namespace cosine
