#include "cosine/groupmap.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace cosine {

namespace {

using GroupCount = std::pair<GroupId, std::size_t>;

// Orders by count descending, then id ascending, and keeps the first n.
void keep_most_frequent(std::vector<GroupCount>& counts, std::size_t n) {
  auto by_frequency = [](const GroupCount& a, const GroupCount& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  if (counts.size() > n) {
    std::partial_sort(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(n), counts.end(), by_frequency);
    counts.resize(n);
  } else {
    std::sort(counts.begin(), counts.end(), by_frequency);
  }
}

}  // namespace

NeighborSampler::NeighborSampler(const Graph& g) : graph_(&g) {
  if (g.unit_weights()) return;
  cumulative_.resize(g.arc_count());
  const auto offsets = g.offsets();
  const auto weights = g.weights();
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    double running = 0;
    for (auto i = offsets[v]; i < offsets[v + 1]; ++i) {
      running += weights[i];
      cumulative_[i] = running;
    }
  }
}

bool NeighborSampler::sample(NodeId v, Rng& rng, NodeId& next) const {
  const auto nb = graph_->neighbors(v);
  if (nb.empty()) return false;
  std::size_t pick = 0;
  if (cumulative_.empty()) {
    pick = uniform_index(rng, nb.size());
  } else {
    const auto begin = cumulative_.begin() + static_cast<std::ptrdiff_t>(graph_->offsets()[v]);
    const auto end = begin + static_cast<std::ptrdiff_t>(nb.size());
    const double r = uniform_real(rng) * *(end - 1);
    pick = static_cast<std::size_t>(std::upper_bound(begin, end, r) - begin);
    pick = std::min(pick, nb.size() - 1);
  }
  next = nb.targets[pick];
  return true;
}

std::vector<NodeId> random_walk(const NeighborSampler& sampler, NodeId start, std::size_t length, Rng& rng) {
  if (start >= sampler.graph().node_count()) throw std::out_of_range("walk start " + std::to_string(start) + " out of range");
  std::vector<NodeId> walk;
  walk.reserve(length);
  NodeId current = start;
  for (std::size_t step = 0; step < length; ++step) {
    if (!sampler.sample(current, rng, current)) break;
    walk.push_back(current);
  }
  return walk;
}

std::vector<NodeId> random_walk(const Graph& g, NodeId start, std::size_t length, Rng& rng) {
  return random_walk(NeighborSampler(g), start, length, rng);
}

GroupSetTable::GroupSetTable(std::size_t node_count, std::size_t set_size, std::size_t group_count)
    : set_size_(set_size), group_count_(group_count), ids_(node_count * set_size, 0), padding_(node_count, 0) {}

std::vector<GroupId> select_by_frequency(const std::map<GroupId, std::size_t>& counts, std::size_t n) {
  std::vector<GroupCount> ranked(counts.begin(), counts.end());
  keep_most_frequent(ranked, n);
  std::vector<GroupId> out;
  out.reserve(ranked.size());
  for (const auto& [gid, count] : ranked) out.push_back(gid);
  return out;
}

GroupSetTable build_group_sets(const Graph& g, const Partition& p, const WalkConfig& cfg, const WalkObserver& observer) {
  if (p.group_of.size() != g.node_count()) throw std::invalid_argument("partition does not match graph");
  if (cfg.walks_per_vertex == 0 || cfg.walk_length == 0 || cfg.set_size == 0)
    throw std::invalid_argument("walks, walk length and set size must be positive");
  if (cfg.set_size > p.group_count)
    throw std::invalid_argument("set size " + std::to_string(cfg.set_size) + " exceeds group count " +
                                std::to_string(p.group_count));

  const std::size_t n = cfg.set_size;
  GroupSetTable table(g.node_count(), n, p.group_count);
  const NeighborSampler sampler(g);
  std::vector<std::vector<std::size_t>> counts_per_worker(std::max<std::size_t>(1, cfg.workers));

  detail::parallel_chunks(g.node_count(), cfg.workers, 64, [&](std::size_t worker, std::size_t begin, std::size_t end) {
    auto& counts = counts_per_worker[worker];
    if (counts.empty()) counts.assign(p.group_count, 0);
    std::vector<GroupId> touched;
    std::vector<GroupCount> ranked;
    std::vector<char> used;
    for (std::size_t vi = begin; vi < end; ++vi) {
      const auto v = static_cast<NodeId>(vi);
      Rng rng = make_rng(cfg.seed, v);
      for (std::size_t w = 0; w < cfg.walks_per_vertex; ++w) {
        const auto walk = random_walk(sampler, v, cfg.walk_length, rng);
        if (observer) observer(v, w, walk);
        for (NodeId u : walk) {
          const GroupId gu = p.group_of[u];
          if (counts[gu]++ == 0) touched.push_back(gu);
        }
      }

      const GroupId own = p.group_of[v];
      ranked.clear();
      for (GroupId gid : touched)
        if (gid != own) ranked.emplace_back(gid, counts[gid]);
      for (GroupId gid : touched) counts[gid] = 0;
      touched.clear();
      keep_most_frequent(ranked, n - 1);

      auto row = table.set(v);
      std::size_t filled = 0;
      row[filled++] = own;
      for (const auto& [gid, count] : ranked) row[filled++] = gid;
      const std::size_t observed = filled;
      if (filled < n) {
        used.assign(p.group_count, 0);
        for (std::size_t i = 0; i < filled; ++i) used[row[i]] = 1;
        for (GroupId gid = 0; filled < n; ++gid)
          if (!used[gid]) row[filled++] = gid;
      }
      table.set_padding(v, n - observed);
    }
  });
  return table;
}

void save_group_sets(const GroupSetTable& table, std::ostream& out) {
  out << "# cosine-groupsets n=" << table.set_size() << " groups=" << table.group_count() << '\n';
  for (NodeId v = 0; v < table.node_count(); ++v) {
    const auto row = table.set(v);
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
    if (table.padding(v)) out << " # pad=" << table.padding(v);
    out << '\n';
  }
}

void save_group_sets_file(const GroupSetTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  save_group_sets(table, out);
}

GroupSetTable load_group_sets(std::istream& in) {
  std::vector<std::vector<GroupId>> rows;
  std::vector<std::size_t> padding;
  std::size_t declared_groups = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = line;
    std::string comment;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      body = line.substr(0, hash);
      comment = line.substr(hash + 1);
    }
    std::istringstream fields(body);
    std::vector<GroupId> row;
    std::string tok;
    while (fields >> tok) {
      std::uint64_t value = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || value >= std::numeric_limits<GroupId>::max())
        throw ParseError("invalid group id '" + tok + "'", line_no);
      row.push_back(static_cast<GroupId>(value));
    }
    std::size_t pad = 0;
    if (const auto pos = comment.find("groups="); pos != std::string::npos)
      declared_groups = std::stoull(comment.substr(pos + 7));
    if (const auto pos = comment.find("pad="); pos != std::string::npos) pad = std::stoull(comment.substr(pos + 4));
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("expected " + std::to_string(rows.front().size()) + " group ids, got " + std::to_string(row.size()),
                       line_no);
    if (pad >= row.size()) throw ParseError("padding count must leave the own group", line_no);
    for (std::size_t i = 1; i < row.size(); ++i)
      if (std::find(row.begin(), row.begin() + i, row[i]) != row.begin() + i)
        throw ParseError("duplicate group id " + std::to_string(row[i]), line_no);
    rows.push_back(std::move(row));
    padding.push_back(pad);
  }
  if (rows.empty()) throw ParseError("group-set file is empty");

  GroupId max_id = 0;
  for (const auto& row : rows)
    for (GroupId gid : row) max_id = std::max(max_id, gid);
  const std::size_t groups = std::max<std::size_t>(declared_groups, std::size_t{max_id} + 1);

  GroupSetTable table(rows.size(), rows.front().size(), groups);
  for (NodeId v = 0; v < rows.size(); ++v) {
    std::copy(rows[v].begin(), rows[v].end(), table.set(v).begin());
    table.set_padding(v, padding[v]);
  }
  return table;
}

GroupSetTable load_group_sets_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open group sets '" + path + "'");
  return load_group_sets(in);
}

}  // namespace cosine
