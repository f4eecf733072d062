#include "cosine/graph.hpp"

#include <bit>
#include <cctype>
#include <limits>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cosine {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'N', 'E'};
constexpr std::uint8_t kBinaryVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary cache assumes little-endian host");

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

NodeId parse_node_id(std::string_view tok, std::size_t line_no) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("invalid node id '" + std::string(tok) + "'", line_no);
  if (value >= std::numeric_limits<NodeId>::max())
    throw ParseError("node id out of range '" + std::string(tok) + "'", line_no);
  return static_cast<NodeId>(value);
}

double parse_weight(std::string_view tok, std::size_t line_no) {
  // from_chars for double is available in libstdc++ 11.
  double value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(value))
    throw ParseError("invalid weight '" + std::string(tok) + "'", line_no);
  if (value <= 0) throw ParseError("weight must be positive, got '" + std::string(tok) + "'", line_no);
  return value;
}

template <class T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
void write_array(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T read_raw(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError("truncated graph cache");
  return value;
}

template <class T>
std::vector<T> read_array(std::istream& in, std::size_t count) {
  std::vector<T> v(count);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T))))
    throw ParseError("truncated graph cache");
  return v;
}

}  // namespace

Graph::Graph(std::size_t node_count, bool directed, std::vector<std::uint64_t> offsets,
             std::vector<NodeId> targets, std::vector<double> weights)
    : node_count_(node_count),
      directed_(directed),
      offsets_(std::move(offsets)),
      targets_(std::move(targets)),
      weights_(std::move(weights)) {
  if (offsets_.size() != node_count_ + 1) throw std::invalid_argument("offsets must have node_count+1 entries");
  if (offsets_.front() != 0) throw std::invalid_argument("offsets must start at 0");
  for (std::size_t i = 0; i < node_count_; ++i)
    if (offsets_[i] > offsets_[i + 1]) throw std::invalid_argument("offsets must be non-decreasing");
  if (offsets_.back() != targets_.size() || targets_.size() != weights_.size())
    throw std::invalid_argument("offsets, targets and weights disagree in length");
  for (NodeId t : targets_)
    if (t >= node_count_) throw std::invalid_argument("target id out of range");
  for (double w : weights_) {
    if (!(w > 0) || !std::isfinite(w)) throw std::invalid_argument("weights must be positive and finite");
    if (w != 1.0) unit_weights_ = false;
  }
}

void Graph::check_node(NodeId v) const {
  if (v >= node_count_)
    throw std::out_of_range("node id " + std::to_string(v) + " out of range [0, " + std::to_string(node_count_) + ")");
}

std::size_t Graph::out_degree(NodeId v) const {
  check_node(v);
  return offsets_[v + 1] - offsets_[v];
}

double Graph::weighted_degree(NodeId v) const {
  double sum = 0;
  for (double w : neighbors(v).weights) sum += w;
  return sum;
}

Neighbors Graph::neighbors(NodeId v) const {
  check_node(v);
  const auto begin = offsets_[v];
  const auto len = offsets_[v + 1] - begin;
  return {std::span<const NodeId>(targets_).subspan(begin, len), std::span<const double>(weights_).subspan(begin, len)};
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(directed_ ? arc_count() : arc_count() / 2 + 1);
  for (NodeId u = 0; u < node_count_; ++u) {
    const auto nb = neighbors(u);
    bool emit_loop = true;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const NodeId v = nb.targets[i];
      if (directed_ || u < v) {
        out.push_back({u, v, nb.weights[i]});
      } else if (u == v) {
        // An undirected self-loop is stored twice in u's list.
        if (emit_loop) out.push_back({u, v, nb.weights[i]});
        emit_loop = !emit_loop;
      }
    }
  }
  return out;
}

Graph build_graph(std::size_t node_count, std::span<const Edge> edges, bool directed) {
  std::vector<std::uint64_t> offsets(node_count + 1, 0);
  for (const Edge& e : edges) {
    if (e.src >= node_count || e.dst >= node_count) throw std::invalid_argument("edge endpoint out of range");
    ++offsets[e.src + 1];
    if (!directed) ++offsets[e.dst + 1];
  }
  for (std::size_t i = 0; i < node_count; ++i) offsets[i + 1] += offsets[i];

  std::vector<NodeId> targets(offsets.back());
  std::vector<double> weights(offsets.back());
  std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const Edge& e : edges) {
    auto pos = cursor[e.src]++;
    targets[pos] = e.dst;
    weights[pos] = e.weight;
    if (!directed) {
      pos = cursor[e.dst]++;
      targets[pos] = e.src;
      weights[pos] = e.weight;
    }
  }
  return Graph(node_count, directed, std::move(offsets), std::move(targets), std::move(weights));
}

LoadedGraph load_edge_list(std::istream& in, bool directed, bool remap_ids) {
  std::vector<Edge> edges;
  std::unordered_map<std::string, NodeId> index;
  LoadedGraph result;
  std::uint64_t max_id = 0;

  auto node_of = [&](std::string_view tok, std::size_t line_no) -> NodeId {
    if (!remap_ids) return parse_node_id(tok, line_no);
    auto [it, inserted] = index.try_emplace(std::string(tok), static_cast<NodeId>(result.names.size()));
    if (inserted) result.names.emplace_back(tok);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 2 && tokens.size() != 3)
      throw ParseError("expected 'src dst [weight]', got " + std::to_string(tokens.size()) + " tokens", line_no);
    Edge e{node_of(tokens[0], line_no), node_of(tokens[1], line_no), 1.0};
    if (tokens.size() == 3) e.weight = parse_weight(tokens[2], line_no);
    max_id = std::max<std::uint64_t>(max_id, std::max(e.src, e.dst));
    edges.push_back(e);
  }
  if (edges.empty()) throw ParseError("edge list is empty");

  const std::size_t node_count = remap_ids ? result.names.size() : static_cast<std::size_t>(max_id) + 1;
  result.graph = build_graph(node_count, edges, directed);
  return result;
}

LoadedGraph load_edge_list_file(const std::string& path, bool directed, bool remap_ids) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path + "'");
  return load_edge_list(in, directed, remap_ids);
}

void save_edge_list(const Graph& g, std::ostream& out) {
  const bool weighted = !g.unit_weights();
  std::ostringstream line;
  line.precision(17);
  for (const Edge& e : g.edges()) {
    out << e.src << ' ' << e.dst;
    if (weighted) {
      line.str({});
      line << e.weight;
      out << ' ' << line.str();
    }
    out << '\n';
  }
}

void save_edge_list_file(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  save_edge_list(g, out);
}

void save_id_map(std::span<const std::string> names, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < names.size(); ++i) out << i << ' ' << names[i] << '\n';
}

void save_graph_binary(const Graph& g, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kBinaryVersion);
  write_raw(out, static_cast<std::uint64_t>(g.node_count()));
  write_raw(out, static_cast<std::uint8_t>(g.directed()));
  write_raw(out, static_cast<std::uint64_t>(g.arc_count()));
  write_array(out, std::vector<std::uint64_t>(g.offsets().begin(), g.offsets().end()));
  write_array(out, std::vector<NodeId>(g.targets().begin(), g.targets().end()));
  write_array(out, std::vector<double>(g.weights().begin(), g.weights().end()));
}

Graph load_graph_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("not a CSNE graph cache");
  if (read_raw<std::uint8_t>(in) != kBinaryVersion) throw ParseError("unsupported graph cache version");
  const auto node_count = read_raw<std::uint64_t>(in);
  const bool directed = read_raw<std::uint8_t>(in) != 0;
  const auto arcs = read_raw<std::uint64_t>(in);
  auto offsets = read_array<std::uint64_t>(in, node_count + 1);
  auto targets = read_array<NodeId>(in, arcs);
  auto weights = read_array<double>(in, arcs);
  try {
    return Graph(node_count, directed, std::move(offsets), std::move(targets), std::move(weights));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("corrupt graph cache: ") + e.what());
  }
}

}  // namespace cosine
