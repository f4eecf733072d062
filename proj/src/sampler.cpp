#include "cosine/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cosine {

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("alias table needs at least one outcome");
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("alias weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0)) throw std::invalid_argument("alias weights sum to zero");

  prob_.resize(n);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  for (auto i : small) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
}

std::size_t AliasTable::sample(Rng& rng) const {
  const std::size_t column = uniform_index(rng, prob_.size());
  return uniform_real(rng) < prob_[column] ? column : alias_[column];
}

double AliasTable::probability(std::size_t i) const {
  double mass = prob_[i];
  for (std::size_t j = 0; j < prob_.size(); ++j)
    if (alias_[j] == i && j != i) mass += 1.0 - prob_[j];
  return mass / static_cast<double>(prob_.size());
}

Method parse_method(const std::string& name) {
  if (name == "line2" || name == "line") return Method::line2;
  if (name == "deepwalk") return Method::deepwalk;
  if (name == "node2vec") return Method::node2vec;
  throw std::invalid_argument("unknown method '" + name + "' (expected line2, deepwalk or node2vec)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::line2: return "line2";
    case Method::deepwalk: return "deepwalk";
    case Method::node2vec: return "node2vec";
  }
  return "?";
}

void SamplerConfig::validate() const {
  if (window == 0 || walk_length == 0 || walks_per_vertex == 0) throw std::invalid_argument("window and walk sizes must be positive");
  if (!(p > 0) || !(q > 0)) throw std::invalid_argument("node2vec p and q must be positive");
  if (!(negative_exponent >= 0)) throw std::invalid_argument("negative exponent must be non-negative");
}

EdgeSampler::EdgeSampler(const Graph& g) : targets_(g.targets()) {
  if (g.arc_count() == 0) throw std::invalid_argument("edge sampling needs at least one edge");
  table_ = AliasTable(g.weights());
  sources_.resize(g.arc_count());
  const auto offsets = g.offsets();
  for (NodeId v = 0; v < g.node_count(); ++v)
    std::fill(sources_.begin() + static_cast<std::ptrdiff_t>(offsets[v]),
              sources_.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]), v);
}

TrainingPair EdgeSampler::sample(Rng& rng) const {
  const std::size_t arc = table_.sample(rng);
  return {sources_[arc], targets_[arc]};
}

LinePairStream::LinePairStream(const Graph& g, std::uint64_t seed) : sampler_(g), rng_(make_rng(seed, 0)) {}

namespace {

std::vector<double> negative_weights(const Graph& g, double exponent) {
  if (!(exponent >= 0)) throw std::invalid_argument("negative exponent must be non-negative");
  std::vector<double> w(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) w[v] = std::pow(g.weighted_degree(v), exponent);
  return w;
}

}  // namespace

NegativeSampler::NegativeSampler(const Graph& g, double exponent) : table_(negative_weights(g, exponent)) {}

void window_pairs(std::span<const NodeId> walk, std::size_t window, std::vector<TrainingPair>& out) {
  for (std::size_t i = 0; i < walk.size(); ++i)
    for (std::size_t j = i + 1; j < walk.size() && j - i <= window; ++j) {
      out.push_back({walk[i], walk[j]});
      out.push_back({walk[j], walk[i]});
    }
}

std::size_t window_pair_count(std::size_t length, std::size_t window) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < length; ++i) total += std::min(window, i) + std::min(window, length - 1 - i);
  return total;
}

Node2VecWalker::Node2VecWalker(const Graph& g, double p, double q)
    : graph_(&g), first_step_(g), inv_p_(1.0 / p), inv_q_(1.0 / q), sorted_targets_(g.targets().begin(), g.targets().end()) {
  if (!(p > 0) || !(q > 0)) throw std::invalid_argument("node2vec p and q must be positive");
  const auto offsets = g.offsets();
  for (NodeId v = 0; v < g.node_count(); ++v)
    std::sort(sorted_targets_.begin() + static_cast<std::ptrdiff_t>(offsets[v]),
              sorted_targets_.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]));
}

bool Node2VecWalker::adjacent(NodeId a, NodeId b) const {
  const auto offsets = graph_->offsets();
  const auto begin = sorted_targets_.begin() + static_cast<std::ptrdiff_t>(offsets[a]);
  const auto end = sorted_targets_.begin() + static_cast<std::ptrdiff_t>(offsets[a + 1]);
  return std::binary_search(begin, end, b);
}

std::vector<std::pair<NodeId, double>> Node2VecWalker::transition_weights(NodeId previous, NodeId current) const {
  const auto nb = graph_->neighbors(current);
  std::vector<std::pair<NodeId, double>> out;
  out.reserve(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) {
    const NodeId x = nb.targets[i];
    double bias = inv_q_;
    if (x == previous) {
      bias = inv_p_;
    } else if (adjacent(previous, x)) {
      bias = 1.0;
    }
    out.emplace_back(x, nb.weights[i] * bias);
  }
  return out;
}

std::vector<NodeId> Node2VecWalker::walk(NodeId start, std::size_t length, Rng& rng) const {
  std::vector<NodeId> path;
  path.reserve(length);
  path.push_back(start);
  if (length < 2) return path;
  NodeId next = 0;
  if (!first_step_.sample(start, rng, next)) return path;
  path.push_back(next);
  std::vector<double> cumulative;
  while (path.size() < length) {
    const NodeId previous = path[path.size() - 2];
    const NodeId current = path.back();
    const auto nb = graph_->neighbors(current);
    if (nb.empty()) break;
    cumulative.resize(nb.size());
    double running = 0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const NodeId x = nb.targets[i];
      const double bias = x == previous ? inv_p_ : adjacent(previous, x) ? 1.0 : inv_q_;
      running += nb.weights[i] * bias;
      cumulative[i] = running;
    }
    const double r = uniform_real(rng) * running;
    auto pick = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
    path.push_back(nb.targets[std::min(pick, nb.size() - 1)]);
  }
  return path;
}

WalkCorpus::WalkCorpus(const Graph& g, const SamplerConfig& cfg, std::uint64_t seed)
    : graph_(&g), cfg_(cfg), seed_(seed), total_(cfg.walks_per_vertex * g.node_count()) {
  cfg.validate();
  roots_.resize(total_);
  Rng rng = make_rng(seed, 0);
  for (std::size_t pass = 0; pass < cfg.walks_per_vertex; ++pass) {
    const auto begin = roots_.begin() + static_cast<std::ptrdiff_t>(pass * g.node_count());
    const auto end = begin + static_cast<std::ptrdiff_t>(g.node_count());
    std::iota(begin, end, NodeId{0});
    std::shuffle(begin, end, rng);
  }
  if (cfg.method == Method::node2vec) {
    second_order_.emplace(g, cfg.p, cfg.q);
  } else {
    first_order_.emplace(g);
  }
}

WalkCorpus::WalkCorpus(std::vector<std::vector<NodeId>> walks) : total_(walks.size()), stored_(std::move(walks)) {}

NodeId WalkCorpus::root(std::size_t i) const {
  if (!stored_.empty()) return stored_[i].empty() ? 0 : stored_[i].front();
  return roots_[i];
}

std::vector<NodeId> WalkCorpus::walk(std::size_t i) const {
  if (i >= total_) throw std::out_of_range("walk index out of range");
  if (graph_ == nullptr) return stored_[i];
  Rng rng = make_rng(seed_, i + 1);
  if (second_order_) return second_order_->walk(roots_[i], cfg_.walk_length, rng);
  std::vector<NodeId> path{roots_[i]};
  const auto steps = random_walk(*first_order_, roots_[i], cfg_.walk_length - 1, rng);
  path.insert(path.end(), steps.begin(), steps.end());
  return path;
}

void save_walks(const WalkCorpus& corpus, std::ostream& out) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto w = corpus.walk(i);
    for (std::size_t j = 0; j < w.size(); ++j) out << (j ? " " : "") << w[j];
    out << '\n';
  }
}

WalkCorpus load_walks(std::istream& in) {
  std::vector<std::vector<NodeId>> walks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<NodeId> w;
    long long id = 0;
    while (fields >> id) {
      if (id < 0) throw ParseError("negative node id in walk", line_no);
      w.push_back(static_cast<NodeId>(id));
    }
    if (!fields.eof()) throw ParseError("invalid token in walk", line_no);
    if (!w.empty()) walks.push_back(std::move(w));
  }
  return WalkCorpus(std::move(walks));
}

WalkPairStream::WalkPairStream(const WalkCorpus& corpus, std::size_t window, std::size_t walk_limit)
    : corpus_(&corpus), window_(window), limit_(walk_limit == 0 ? corpus.size() : std::min(walk_limit, corpus.size())) {}

bool WalkPairStream::next(TrainingPair& pair) {
  while (pos_ == buffer_.size()) {
    if (next_walk_ >= limit_) return false;
    buffer_.clear();
    pos_ = 0;
    window_pairs(corpus_->walk(next_walk_++), window_, buffer_);
  }
  pair = buffer_[pos_++];
  return true;
}

}  // namespace cosine
