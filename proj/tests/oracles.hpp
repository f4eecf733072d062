#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// suites.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cosine/groupmap.hpp"
#include "cosine/partition.hpp"

namespace oracles {

using cosine::Edge;
using cosine::Graph;
using cosine::GroupId;
using cosine::NodeId;
using cosine::Partition;

// Independent O(E) recount over the original edge list.
inline double brute_cut(const Graph& g, const Partition& p) {
  double cut = 0;
  for (const Edge& e : g.edges())
    if (p.group_of[e.src] != p.group_of[e.dst]) cut += e.weight;
  return cut;
}

// Brute-force recount of one node's set from its recorded walks.
inline std::vector<GroupId> brute_set(const Partition& p, NodeId root, const std::vector<std::vector<NodeId>>& walks,
                               std::size_t n) {
  std::vector<std::size_t> counts(p.group_count, 0);
  for (const auto& w : walks)
    for (NodeId x : w) ++counts[p.group_of[x]];
  const GroupId own = p.group_of[root];
  std::vector<GroupId> others;
  for (GroupId gid = 0; gid < p.group_count; ++gid)
    if (gid != own && counts[gid] > 0) others.push_back(gid);
  std::stable_sort(others.begin(), others.end(), [&](GroupId a, GroupId b) { return counts[a] > counts[b]; });
  std::vector<GroupId> out{own};
  for (GroupId gid : others)
    if (out.size() < n) out.push_back(gid);
  for (GroupId gid = 0; out.size() < n; ++gid)
    if (std::find(out.begin(), out.end(), gid) == out.end()) out.push_back(gid);
  return out;
}

// Straight-line evaluation of tanh(sum_i lambda_i * row(g_i)) from raw tables.
inline std::vector<double> naive_aggregate(const std::vector<double>& table, std::size_t dim, const std::vector<GroupId>& gset,
                                    const std::vector<double>& kernel) {
  std::vector<double> out(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    double s = 0;
    for (std::size_t i = 0; i < gset.size(); ++i) s += kernel[i] * table[gset[i] * dim + c];
    out[c] = std::tanh(s);
  }
  return out;
}

}  // namespace oracles
