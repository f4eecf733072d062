#include "cosine/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace cosine {

namespace {

using Json = nlohmann::json;

std::uint64_t pair_key(NodeId a, NodeId b) { return (std::uint64_t{a} << 32) | b; }

// Arc set of a graph plus extra edges, with both orientations for undirected
// graphs.
std::unordered_set<std::uint64_t> edge_keys(const Graph& g, std::span<const std::pair<NodeId, NodeId>> extra) {
  std::unordered_set<std::uint64_t> keys;
  keys.reserve(g.arc_count() + 2 * extra.size());
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (NodeId v : g.neighbors(u).targets) keys.insert(pair_key(u, v));
  for (const auto& [u, v] : extra) {
    keys.insert(pair_key(u, v));
    if (!g.directed()) keys.insert(pair_key(v, u));
  }
  return keys;
}

}  // namespace

EvalSplit split_edges(const Graph& g, double holdout_ratio, std::uint64_t seed) {
  if (!(holdout_ratio > 0 && holdout_ratio < 1)) throw std::invalid_argument("holdout ratio must be in (0, 1)");
  std::vector<Edge> edges = g.edges();
  const auto holdout = static_cast<std::size_t>(std::llround(holdout_ratio * static_cast<double>(edges.size())));
  if (holdout == 0 || holdout >= edges.size())
    throw std::invalid_argument("graph with " + std::to_string(edges.size()) + " edges is too small for a " +
                                std::to_string(holdout_ratio) + " holdout");

  Rng rng = make_rng(seed, 0);
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> held(edges.size(), 0);
  for (std::size_t i = 0; i < holdout; ++i) held[order[i]] = 1;

  EvalSplit split;
  split.seed = seed;
  std::vector<Edge> train;
  train.reserve(edges.size() - holdout);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (held[i]) {
      split.test_pos.emplace_back(edges[i].src, edges[i].dst);
    } else {
      train.push_back(edges[i]);
    }
  }
  split.train_graph = build_graph(g.node_count(), train, g.directed());

  const auto existing = edge_keys(g, {});
  const std::size_t max_attempts = 100 * holdout;
  std::size_t attempts = 0;
  while (split.test_neg.size() < holdout) {
    if (attempts++ >= max_attempts)
      throw std::runtime_error("could not sample " + std::to_string(holdout) + " non-edges after " +
                               std::to_string(max_attempts) + " attempts; graph too dense");
    const auto a = static_cast<NodeId>(uniform_index(rng, g.node_count()));
    const auto b = static_cast<NodeId>(uniform_index(rng, g.node_count()));
    if (a == b || existing.contains(pair_key(a, b))) continue;
    split.test_neg.emplace_back(a, b);
  }
  return split;
}

void save_split(const EvalSplit& split, std::ostream& out) {
  Json j;
  j["node_count"] = split.train_graph.node_count();
  j["directed"] = split.train_graph.directed();
  j["seed"] = split.seed;
  Json train = Json::array();
  for (const Edge& e : split.train_graph.edges()) train.push_back({e.src, e.dst, e.weight});
  j["train_edges"] = std::move(train);
  j["test_pos"] = split.test_pos;
  j["test_neg"] = split.test_neg;
  out << j.dump() << '\n';
}

void save_split_file(const EvalSplit& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  save_split(split, out);
}

EvalSplit load_split(std::istream& in) {
  EvalSplit split;
  try {
    const Json j = Json::parse(in);
    const auto node_count = j.at("node_count").get<std::size_t>();
    const bool directed = j.at("directed").get<bool>();
    split.seed = j.value("seed", std::uint64_t{0});
    std::vector<Edge> train;
    for (const auto& e : j.at("train_edges"))
      train.push_back({e.at(0).get<NodeId>(), e.at(1).get<NodeId>(), e.size() > 2 ? e.at(2).get<double>() : 1.0});
    split.train_graph = build_graph(node_count, train, directed);
    split.test_pos = j.at("test_pos").get<std::vector<std::pair<NodeId, NodeId>>>();
    split.test_neg = j.at("test_neg").get<std::vector<std::pair<NodeId, NodeId>>>();
    for (const auto* list : {&split.test_pos, &split.test_neg})
      for (const auto& [a, b] : *list)
        if (a >= node_count || b >= node_count) throw ParseError("split references node outside the graph");
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed split file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("malformed split file: ") + e.what());
  }
  return split;
}

EvalSplit load_split_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open split '" + path + "'");
  return load_split(in);
}

ScoreOp parse_score_op(const std::string& name) {
  if (name == "l1") return ScoreOp::l1;
  if (name == "l2") return ScoreOp::l2;
  if (name == "dot") return ScoreOp::dot;
  throw std::invalid_argument("unknown score op '" + name + "' (expected dot, l1 or l2)");
}

std::string score_op_name(ScoreOp op) {
  switch (op) {
    case ScoreOp::l1: return "l1";
    case ScoreOp::l2: return "l2";
    case ScoreOp::dot: return "dot";
  }
  return "?";
}

double pair_score(std::span<const double> a, std::span<const double> b, ScoreOp op) {
  if (a.size() != b.size())
    throw std::invalid_argument("embedding dims differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double acc = 0;
  switch (op) {
    case ScoreOp::dot:
      for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
      return acc;
    case ScoreOp::l1:
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
      return -acc;
    case ScoreOp::l2:
      for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
      return -std::sqrt(acc);
  }
  return 0;
}

double auc_from_scores(std::span<const double> pos, std::span<const double> neg, std::size_t comparisons,
                       std::uint64_t seed) {
  if (pos.empty() || neg.empty()) throw std::invalid_argument("AUC needs positive and negative scores");
  if (comparisons == 0) throw std::invalid_argument("AUC needs at least one comparison");
  Rng rng = make_rng(seed, 0);
  double wins = 0;
  for (std::size_t i = 0; i < comparisons; ++i) {
    const double p = pos[uniform_index(rng, pos.size())];
    const double n = neg[uniform_index(rng, neg.size())];
    wins += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  }
  return wins / static_cast<double>(comparisons);
}

double auc_exhaustive(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw std::invalid_argument("AUC needs positive and negative scores");
  double wins = 0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double auc(const EvalSplit& split, const EmbeddingMatrix& emb, ScoreOp op, std::size_t comparisons,
           std::uint64_t seed) {
  if (split.test_pos.empty() || split.test_neg.empty()) throw std::invalid_argument("split has no test pairs");
  auto scores = [&](const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& [a, b] : pairs) out.push_back(pair_score(emb.row(a), emb.row(b), op));
    return out;
  };
  return auc_from_scores(scores(split.test_pos), scores(split.test_neg), comparisons, seed);
}

double reciprocal_rank(double true_score, std::span<const double> candidate_scores) {
  double better = 0;
  double tied = 0;
  for (double s : candidate_scores) {
    if (s > true_score) {
      better += 1;
    } else if (s == true_score) {
      tied += 1;
    }
  }
  // Tied block occupies ranks better+1 .. better+tied+1.
  return 1.0 / (1.0 + better + 0.5 * tied);
}

double mrr(const EvalSplit& split, const EmbeddingMatrix& emb, ScoreOp op, std::size_t candidates_per_query,
           std::uint64_t seed) {
  if (split.test_pos.empty()) throw std::invalid_argument("split has no held-out edges");
  if (candidates_per_query == 0) throw std::invalid_argument("MRR needs at least one candidate per query");
  const Graph& g = split.train_graph;
  const auto existing = edge_keys(g, split.test_pos);
  const std::size_t n = g.node_count();
  Rng rng = make_rng(seed, 0);
  std::vector<double> candidates;
  double total = 0;
  for (const auto& [head, tail] : split.test_pos) {
    candidates.clear();
    std::size_t attempts = 0;
    while (candidates.size() < candidates_per_query) {
      if (attempts++ >= 100 * candidates_per_query)
        throw std::runtime_error("could not sample non-edge candidates for node " + std::to_string(head));
      const auto t = static_cast<NodeId>(uniform_index(rng, n));
      if (t == head || existing.contains(pair_key(head, t))) continue;
      candidates.push_back(pair_score(emb.row(head), emb.row(t), op));
    }
    total += reciprocal_rank(pair_score(emb.row(head), emb.row(tail), op), candidates);
  }
  return total / static_cast<double>(split.test_pos.size());
}

LabelSet load_labels(std::istream& in, std::size_t node_count) {
  LabelSet set;
  set.labels.resize(node_count);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long node = -1, label = -1;
    std::string extra;
    if (!(fields >> node >> label) || (fields >> extra)) throw ParseError("expected 'node_id label_id'", line_no);
    if (node < 0 || static_cast<std::size_t>(node) >= node_count) throw ParseError("node id out of range", line_no);
    if (label < 0 || label > std::numeric_limits<std::uint32_t>::max() / 2) throw ParseError("invalid label id", line_no);
    set.labels[node].push_back(static_cast<std::uint32_t>(label));
    set.label_count = std::max<std::size_t>(set.label_count, static_cast<std::size_t>(label) + 1);
  }
  for (auto& l : set.labels) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return set;
}

LabelSet load_labels_file(const std::string& path, std::size_t node_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels '" + path + "'");
  return load_labels(in, node_count);
}

F1Scores f1_scores(std::span<const std::vector<std::uint32_t>> truth,
                   std::span<const std::vector<std::uint32_t>> predicted, std::size_t label_count,
                   std::span<const std::uint32_t> macro_labels) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("truth and prediction counts differ");
  std::vector<double> tp(label_count, 0), fp(label_count, 0), fn(label_count, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (auto l : predicted[i]) {
      if (std::find(truth[i].begin(), truth[i].end(), l) != truth[i].end()) {
        tp[l] += 1;
      } else {
        fp[l] += 1;
      }
    }
    for (auto l : truth[i])
      if (std::find(predicted[i].begin(), predicted[i].end(), l) == predicted[i].end()) fn[l] += 1;
  }
  auto f1 = [](double t, double p, double n) { return t + p + n > 0 ? 2 * t / (2 * t + p + n) : 0.0; };

  std::vector<std::uint32_t> all;
  if (macro_labels.empty()) {
    all.resize(label_count);
    std::iota(all.begin(), all.end(), 0u);
    macro_labels = all;
  }
  F1Scores s;
  double sum_tp = 0, sum_fp = 0, sum_fn = 0;
  for (std::uint32_t l : macro_labels) s.macro += f1(tp[l], fp[l], fn[l]);
  for (std::size_t l = 0; l < label_count; ++l) {
    sum_tp += tp[l];
    sum_fp += fp[l];
    sum_fn += fn[l];
  }
  s.macro = macro_labels.empty() ? 0.0 : s.macro / static_cast<double>(macro_labels.size());
  s.micro = f1(sum_tp, sum_fp, sum_fn);
  return s;
}

namespace {

// Binary L2-regularized logistic regression (bias unregularized) fitted by
// full-batch gradient descent with step 1/L.
std::vector<double> fit_logistic(const EmbeddingMatrix& emb, std::span<const NodeId> nodes, std::span<const char> y,
                                 const ClassifyOptions& opts) {
  const std::size_t d = emb.dim;
  std::vector<double> w(d + 1, 0.0);
  std::vector<double> grad(d + 1);
  double max_sq = 0;
  for (NodeId v : nodes) {
    double sq = 1.0;
    for (double x : emb.row(v)) sq += x * x;
    max_sq = std::max(max_sq, sq);
  }
  const double step = 1.0 / (0.25 * max_sq + opts.l2_reg);
  const double inv_n = 1.0 / static_cast<double>(nodes.size());
  for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto x = emb.row(nodes[i]);
      double z = w[d];
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
      const double residual = 1.0 / (1.0 + std::exp(-z)) - (y[i] ? 1.0 : 0.0);
      for (std::size_t j = 0; j < d; ++j) grad[j] += residual * x[j];
      grad[d] += residual;
    }
    double norm = 0;
    for (std::size_t j = 0; j <= d; ++j) {
      grad[j] *= inv_n;
      if (j < d) grad[j] += opts.l2_reg * w[j];
      norm = std::max(norm, std::abs(grad[j]));
    }
    if (norm < opts.tolerance) break;
    for (std::size_t j = 0; j <= d; ++j) w[j] -= step * grad[j];
  }
  return w;
}

}  // namespace

F1Scores classify(const EmbeddingMatrix& emb, const LabelSet& labels, const ClassifyOptions& opts) {
  if (!(opts.train_ratio > 0 && opts.train_ratio < 1)) throw std::invalid_argument("train ratio must be in (0, 1)");
  if (labels.labels.size() > emb.rows) throw std::invalid_argument("labels reference nodes without embeddings");
  std::vector<NodeId> labeled;
  for (NodeId v = 0; v < labels.labels.size(); ++v)
    if (!labels.labels[v].empty()) labeled.push_back(v);
  if (labeled.size() < 2) throw std::invalid_argument("classification needs at least two labeled nodes");

  Rng rng = make_rng(opts.seed, 0);
  std::shuffle(labeled.begin(), labeled.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(opts.train_ratio * static_cast<double>(labeled.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, labeled.size() - 1);
  const std::span<const NodeId> train(labeled.data(), n_train);
  const std::span<const NodeId> test(labeled.data() + n_train, labeled.size() - n_train);

  const std::size_t d = emb.dim;
  std::vector<std::vector<double>> models(labels.label_count);
  std::vector<std::uint32_t> trained;
  std::vector<char> y(train.size());
  for (std::uint32_t l = 0; l < labels.label_count; ++l) {
    std::size_t positives = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const auto& ls = labels.labels[train[i]];
      y[i] = std::binary_search(ls.begin(), ls.end(), l);
      positives += y[i];
    }
    if (positives == 0) {
      warn("label " + std::to_string(l) + " has no positive training examples; skipped in macro-F1");
      continue;
    }
    models[l] = fit_logistic(emb, train, y, opts);
    trained.push_back(l);
  }

  std::vector<std::vector<std::uint32_t>> truth, predicted;
  std::vector<std::pair<double, std::uint32_t>> scored;
  for (NodeId v : test) {
    const auto x = emb.row(v);
    scored.clear();
    for (std::uint32_t l : trained) {
      const auto& w = models[l];
      double z = w[d];
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
      scored.emplace_back(z, l);
    }
    const std::size_t k = std::min(labels.labels[v].size(), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                      [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    std::vector<std::uint32_t> top;
    for (std::size_t i = 0; i < k; ++i) top.push_back(scored[i].second);
    truth.push_back(labels.labels[v]);
    predicted.push_back(std::move(top));
  }
  return f1_scores(truth, predicted, labels.label_count, trained);
}

}  // namespace cosine
