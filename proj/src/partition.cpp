#include "cosine/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace cosine {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Reverse adjacency so directed graphs see both arc directions when a node
// weighs its neighboring groups.
Graph transpose(const Graph& g) {
  std::vector<Edge> reversed;
  reversed.reserve(g.arc_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto nb = g.neighbors(u);
    for (std::size_t i = 0; i < nb.size(); ++i) reversed.push_back({nb.targets[i], u, nb.weights[i]});
  }
  return build_graph(g.node_count(), reversed, true);
}

}  // namespace

std::vector<std::size_t> Partition::group_sizes() const {
  std::vector<std::size_t> sizes(group_count, 0);
  for (GroupId gid : group_of) ++sizes[gid];
  return sizes;
}

std::size_t group_size_cap(std::size_t node_count, std::size_t k, double epsilon) {
  const auto ideal = static_cast<double>(ceil_div(node_count, k));
  return static_cast<std::size_t>(std::floor((1.0 + epsilon) * ideal + 1e-9));
}

Partition partition_label_propagation(const Graph& g, std::size_t k, double epsilon, int max_rounds,
                                      std::uint64_t seed, const RoundObserver& observer) {
  const std::size_t n = g.node_count();
  if (k == 0) throw std::invalid_argument("group count must be positive");
  if (k > n) throw std::invalid_argument("group count " + std::to_string(k) + " exceeds node count " + std::to_string(n));
  if (!(epsilon >= 0)) throw std::invalid_argument("imbalance epsilon must be non-negative");
  if (max_rounds < 1) throw std::invalid_argument("max_rounds must be at least 1");

  Rng rng = make_rng(seed, 0);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);

  Partition p;
  p.group_count = k;
  p.group_of.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) p.group_of[order[i]] = static_cast<GroupId>(i * k / n);
  std::vector<std::size_t> sizes = p.group_sizes();
  const std::size_t cap = group_size_cap(n, k, epsilon);
  if (observer) observer({0, 0, p});

  std::optional<Graph> incoming;
  if (g.directed()) incoming = transpose(g);

  std::vector<double> conn(k, 0.0);
  std::vector<GroupId> touched;
  auto accumulate = [&](const Graph& adj, NodeId v) {
    const auto nb = adj.neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const NodeId u = nb.targets[i];
      if (u == v) continue;
      const GroupId gu = p.group_of[u];
      if (conn[gu] == 0.0) touched.push_back(gu);
      conn[gu] += nb.weights[i];
    }
  };
  auto reset = [&] {
    for (GroupId gid : touched) conn[gid] = 0.0;
    touched.clear();
  };
  auto weight_between = [&](NodeId a, NodeId b) {
    double w = 0;
    auto add = [&](const Graph& adj) {
      const auto nb = adj.neighbors(a);
      for (std::size_t i = 0; i < nb.size(); ++i)
        if (nb.targets[i] == b) w += nb.weights[i];
    };
    add(g);
    if (incoming) add(*incoming);
    return w;
  };
  // Gain of moving v from its group to `to` under the current labels.
  auto move_gain = [&](NodeId v, GroupId to) {
    accumulate(g, v);
    if (incoming) accumulate(*incoming, v);
    const double gain = conn[to] - conn[p.group_of[v]];
    reset();
    return gain;
  };

  // Nodes blocked by a full target this round, keyed by (from, to). A node
  // blocked the other way can swap with one of them, which keeps both sizes.
  std::map<std::pair<GroupId, GroupId>, std::vector<NodeId>> blocked;

  for (int round = 1; round <= max_rounds; ++round) {
    std::shuffle(order.begin(), order.end(), rng);
    blocked.clear();
    std::size_t moves = 0;
    for (NodeId v : order) {
      accumulate(g, v);
      if (incoming) accumulate(*incoming, v);
      const GroupId current = p.group_of[v];
      GroupId best = current;
      double best_weight = conn[current];
      GroupId full_best = current;
      double full_weight = conn[current];
      for (GroupId cand : touched) {
        if (cand == current) continue;
        if (sizes[cand] >= cap || sizes[current] <= 1) {
          if (conn[cand] > full_weight || (conn[cand] == full_weight && full_best != current && cand < full_best)) {
            full_best = cand;
            full_weight = conn[cand];
          }
          continue;
        }
        if (conn[cand] > best_weight || (conn[cand] == best_weight && best != current && cand < best)) {
          best = cand;
          best_weight = conn[cand];
        }
      }
      const double full_gain = full_weight - conn[current];
      reset();
      if (best != current) {
        --sizes[current];
        ++sizes[best];
        p.group_of[v] = best;
        ++moves;
        continue;
      }
      if (full_best == current) continue;
      auto it = blocked.find({full_best, current});
      bool swapped = false;
      if (it != blocked.end()) {
        auto& partners = it->second;
        while (!partners.empty() && !swapped) {
          const NodeId u = partners.back();
          partners.pop_back();
          if (p.group_of[u] != full_best) continue;
          const double delta = full_gain + move_gain(u, current) - 2 * weight_between(v, u);
          if (delta > 0) {
            p.group_of[v] = full_best;
            p.group_of[u] = current;
            moves += 2;
            swapped = true;
          }
        }
      }
      if (!swapped) blocked[{current, full_best}].push_back(v);
    }
    if (observer) observer({round, moves, p});
    if (moves == 0) break;
  }
  return p;
}

Partition load_partition(std::istream& in, std::size_t node_count) {
  std::vector<std::uint64_t> raw;
  raw.reserve(node_count);
  std::string line;
  std::size_t line_no = 0;
  std::size_t trailing_blank = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      ++trailing_blank;
      continue;
    }
    if (trailing_blank) throw ParseError("blank line inside partition file", line_no - 1);
    const auto last = line.find_last_not_of(" \t\r");
    std::uint64_t value = 0;
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || value >= std::numeric_limits<GroupId>::max())
      throw ParseError("invalid group id '" + std::string(begin, end) + "'", line_no);
    raw.push_back(value);
  }
  if (raw.size() != node_count)
    throw ParseError("partition has " + std::to_string(raw.size()) + " entries, expected " + std::to_string(node_count));

  const std::uint64_t declared = raw.empty() ? 0 : *std::max_element(raw.begin(), raw.end()) + 1;
  std::vector<GroupId> dense(declared, std::numeric_limits<GroupId>::max());
  for (auto gid : raw) dense[gid] = 0;
  GroupId next = 0;
  for (auto& slot : dense)
    if (slot == 0) slot = next++;

  Partition p;
  p.group_count = next;
  p.group_of.reserve(node_count);
  for (auto gid : raw) p.group_of.push_back(dense[gid]);
  if (next != declared)
    warn("partition uses " + std::to_string(next) + " of " + std::to_string(declared) +
         " declared groups; ids compacted");
  return p;
}

Partition load_partition_file(const std::string& path, std::size_t node_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open partition '" + path + "'");
  return load_partition(in, node_count);
}

void save_partition(const Partition& p, std::ostream& out) {
  for (GroupId gid : p.group_of) out << gid << '\n';
}

void save_partition_file(const Partition& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  save_partition(p, out);
}

PartitionQuality partition_quality(const Graph& g, const Partition& p) {
  if (p.group_of.size() != g.node_count())
    throw std::invalid_argument("partition covers " + std::to_string(p.group_of.size()) + " nodes, graph has " +
                                std::to_string(g.node_count()));
  PartitionQuality q;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto nb = g.neighbors(u);
    for (std::size_t i = 0; i < nb.size(); ++i)
      if (p.group_of[u] != p.group_of[nb.targets[i]]) q.edge_cut += nb.weights[i];
  }
  if (!g.directed()) q.edge_cut /= 2;
  if (p.group_count > 0 && g.node_count() > 0) {
    const auto sizes = p.group_sizes();
    q.imbalance = static_cast<double>(*std::max_element(sizes.begin(), sizes.end())) /
                  static_cast<double>(ceil_div(g.node_count(), p.group_count));
  }
  return q;
}

}  // namespace cosine
