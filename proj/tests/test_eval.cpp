#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "cosine/eval.hpp"
#include "fixtures.hpp"

using namespace cosine;

namespace {

using Pairs = std::vector<std::pair<NodeId, NodeId>>;

std::set<std::pair<NodeId, NodeId>> undirected_set(const Graph& g) {
  std::set<std::pair<NodeId, NodeId>> s;
  for (const Edge& e : g.edges()) s.insert(std::minmax(e.src, e.dst));
  return s;
}

}  // namespace

TEST_CASE("ten-edge graph holds out one edge") {
  const Graph g = fixtures::path(11);
  const EvalSplit s = split_edges(g, 0.1, 3);
  CHECK(s.test_pos.size() == 1);
  CHECK(s.test_neg.size() == 1);
  CHECK(s.train_graph.edges().size() == 9);
  CHECK(s.train_graph.node_count() == 11);
}

TEST_CASE("held-out edges never stay in the training graph") {
  const Graph g = fixtures::karate();
  const auto original = undirected_set(g);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EvalSplit s = split_edges(g, 0.1, seed);
    const auto train = undirected_set(s.train_graph);
    CHECK(s.test_pos.size() == 8);
    CHECK(s.test_neg.size() == s.test_pos.size());
    for (auto [a, b] : s.test_pos) {
      CHECK(original.contains(std::minmax(a, b)));
      CHECK_FALSE(train.contains(std::minmax(a, b)));
    }
    for (auto [a, b] : s.test_neg) {
      CHECK(a != b);
      CHECK_FALSE(original.contains(std::minmax(a, b)));
    }
    CHECK(train.size() + s.test_pos.size() == original.size());
  }
}

TEST_CASE("split degenerate inputs") {
  std::vector<Edge> k5;
  for (NodeId a = 0; a < 5; ++a)
    for (NodeId b = a + 1; b < 5; ++b) k5.push_back({a, b});
  CHECK_THROWS_AS(split_edges(build_graph(5, k5, false), 0.1, 1), std::runtime_error);
  CHECK_THROWS_AS(split_edges(fixtures::path(3), 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_edges(fixtures::karate(), 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_edges(fixtures::karate(), 1.0, 1), std::invalid_argument);
}

TEST_CASE("split is deterministic and round-trips") {
  const Graph g = fixtures::karate();
  const EvalSplit a = split_edges(g, 0.2, 9);
  const EvalSplit b = split_edges(g, 0.2, 9);
  CHECK(a.test_pos == b.test_pos);
  CHECK(a.test_neg == b.test_neg);
  std::stringstream buf;
  save_split(a, buf);
  const EvalSplit c = load_split(buf);
  CHECK(c.test_pos == a.test_pos);
  CHECK(c.test_neg == a.test_neg);
  CHECK(c.seed == 9);
  CHECK(std::ranges::equal(c.train_graph.offsets(), a.train_graph.offsets()));
  CHECK(std::ranges::equal(c.train_graph.targets(), a.train_graph.targets()));
  std::istringstream junk("{\"test_pos\": 3}");
  CHECK_THROWS_AS(load_split(junk), ParseError);
}

TEST_CASE("pair scores") {
  const std::vector<double> x{1, 0}, y{0, 1}, a{1, 2}, b{3, 4};
  CHECK(pair_score(x, x, ScoreOp::l2) == 0.0);
  CHECK(pair_score(x, y, ScoreOp::dot) == 0.0);
  CHECK(pair_score(a, b, ScoreOp::l1) == -4.0);
  CHECK(pair_score(a, b, ScoreOp::l2) == doctest::Approx(-std::sqrt(8.0)));
  CHECK_THROWS_AS(pair_score(x, std::vector<double>{1}, ScoreOp::dot), std::invalid_argument);
  CHECK(parse_score_op("l1") == ScoreOp::l1);
  CHECK_THROWS_AS(parse_score_op("cos"), std::invalid_argument);
}

TEST_CASE("AUC fixtures") {
  const std::vector<double> ones(5, 1.0), zeros(7, 0.0), half(4, 0.5);
  CHECK(auc_from_scores(ones, zeros, 1000, 1) == 1.0);
  CHECK(auc_from_scores(half, half, 1000, 1) == 0.5);
  CHECK(auc_exhaustive(std::vector<double>{0.9, 0.4}, std::vector<double>{0.5, 0.1}) == 0.75);
  CHECK_THROWS_AS(auc_from_scores({}, zeros, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(auc_from_scores(ones, zeros, 0, 1), std::invalid_argument);
}

TEST_CASE("sampled AUC tracks the exhaustive value") {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> pos(5 + uniform_index(rng, 40)), neg(5 + uniform_index(rng, 40));
    for (double& s : pos) s = std::round(10 * uniform_real(rng) + 2) / 10;
    for (double& s : neg) s = std::round(10 * uniform_real(rng)) / 10;
    CHECK(std::abs(auc_from_scores(pos, neg, 100000, t) - auc_exhaustive(pos, neg)) <= 0.01);
  }
}

TEST_CASE("rank statistics ignore strictly increasing transforms") {
  Rng rng(4);
  std::vector<double> pos(30), neg(30);
  for (double& s : pos) s = uniform_real(rng) - 0.3;
  for (double& s : neg) s = uniform_real(rng) - 0.6;
  auto tf = [](std::vector<double> v) {
    for (double& s : v) s = std::exp(3 * s) + s * s * s;
    return v;
  };
  CHECK(auc_from_scores(pos, neg, 5000, 7) == auc_from_scores(tf(pos), tf(neg), 5000, 7));
  CHECK(auc_exhaustive(pos, neg) == auc_exhaustive(tf(pos), tf(neg)));
  for (std::size_t i = 0; i < pos.size(); ++i)
    CHECK(reciprocal_rank(pos[i], neg) == reciprocal_rank(tf({pos[i]})[0], tf(neg)));
}

TEST_CASE("reciprocal rank fixtures") {
  CHECK(reciprocal_rank(0.5, std::vector<double>{0.7, 0.3}) == 0.5);
  CHECK(reciprocal_rank(1.0, std::vector<double>(9, 0.0)) == 1.0);
  CHECK(reciprocal_rank(0.0, std::vector<double>(9, 1.0)) == doctest::Approx(0.1));
  // Tied with both candidates: mean of ranks 1..3.
  CHECK(reciprocal_rank(0.4, std::vector<double>{0.4, 0.4}) == doctest::Approx(0.5));
}

TEST_CASE("MRR end to end") {
  // Held-out edge (0,1); every other node is a valid candidate.
  EvalSplit s;
  s.train_graph = build_graph(10, std::vector<Edge>{}, false);
  s.test_pos = {{0, 1}};
  s.test_neg = {{2, 3}};
  EmbeddingMatrix best{10, 1, std::vector<double>(10, 0.0)};
  best.data[0] = 1;
  best.data[1] = 1;
  CHECK(mrr(s, best, ScoreOp::dot, 50, 3) == 1.0);
  EmbeddingMatrix worst{10, 1, std::vector<double>(10, 1.0)};
  worst.data[1] = -1;
  CHECK(mrr(s, worst, ScoreOp::dot, 9, 3) == doctest::Approx(0.1));
  const double m = mrr(s, EmbeddingMatrix{10, 1, std::vector<double>(10, 0.3)}, ScoreOp::l2, 9, 3);
  CHECK(m >= 1.0 / 10);
  CHECK(m <= 1.0);
}

TEST_CASE("MRR candidates skip the head and its true neighbors") {
  // Head 0 is adjacent to 1..4 in training; held-out edge (0,5). Only 6..9
  // are valid candidates, all scoring above the true tail.
  std::vector<Edge> train;
  for (NodeId t = 1; t <= 4; ++t) train.push_back({0, t});
  EvalSplit s;
  s.train_graph = build_graph(10, train, false);
  s.test_pos = {{0, 5}};
  s.test_neg = {{6, 7}};
  EmbeddingMatrix e{10, 1, std::vector<double>(10, 0.0)};
  e.data[0] = 1;
  for (NodeId t = 1; t <= 4; ++t) e.data[t] = -5;  // would rank below if sampled
  e.data[5] = 0.5;
  for (NodeId t = 6; t <= 9; ++t) e.data[t] = 1;
  CHECK(mrr(s, e, ScoreOp::dot, 20, 1) == doctest::Approx(1.0 / 21));
}

TEST_CASE("F1 fixtures") {
  using L = std::vector<std::uint32_t>;
  const std::vector<L> truth{{0}, {0}, {1}, {1}, {0, 1}, {0}};
  const std::vector<L> pred{{0}, {1}, {1}, {0}, {0, 1}, {}};
  const auto f = f1_scores(truth, pred, 2);
  CHECK(f.micro == doctest::Approx(8.0 / 13));
  CHECK(f.macro == doctest::Approx(13.0 / 21));

  const std::vector<L> single{{0}, {1}, {0}, {1}};
  const std::vector<L> flipped{{1}, {0}, {1}, {0}};
  const auto z = f1_scores(single, flipped, 2);
  CHECK(z.micro == 0.0);
  CHECK(z.macro == 0.0);

  const std::vector<std::uint32_t> only_first{0};
  const auto m = f1_scores(truth, pred, 2, only_first);
  CHECK(m.macro == doctest::Approx(4.0 / 7));
  CHECK(m.micro == doctest::Approx(8.0 / 13));
}

TEST_CASE("separable embeddings classify perfectly") {
  Rng rng(6);
  const std::size_t n = 400;
  EmbeddingMatrix e{n, 2, std::vector<double>(2 * n)};
  LabelSet labels;
  labels.labels.resize(n);
  labels.label_count = 2;
  for (NodeId v = 0; v < n; ++v) {
    double x, y;
    do {
      x = 2 * uniform_real(rng) - 1;
      y = 2 * uniform_real(rng) - 1;
    } while (std::abs(x) < 0.3 || std::abs(y) < 0.3 || (x < 0 && y < 0));
    e.row(v)[0] = x;
    e.row(v)[1] = y;
    if (x > 0) labels.labels[v].push_back(0);
    if (y > 0) labels.labels[v].push_back(1);
  }
  ClassifyOptions opts;
  opts.train_ratio = 0.5;
  opts.l2_reg = 1e-6;
  opts.max_iterations = 2000;
  const auto f = classify(e, labels, opts);
  CHECK(f.micro == 1.0);
  CHECK(f.macro == 1.0);
}

TEST_CASE("labels without training positives are skipped with a warning") {
  EmbeddingMatrix e{20, 1, std::vector<double>(20, 0.0)};
  LabelSet labels;
  labels.labels.resize(20);
  labels.label_count = 3;  // label 2 has no positives anywhere
  for (NodeId v = 0; v < 19; ++v) {
    e.row(v)[0] = v % 2 ? 1 : -1;
    labels.labels[v] = {0};
  }
  e.row(19)[0] = 1;
  labels.labels[19] = {1};
  std::vector<std::string> warnings;
  auto old = set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
  ClassifyOptions opts;
  opts.train_ratio = 0.3;
  opts.seed = 0;
  const auto f = classify(e, labels, opts);
  set_warning_handler(old);
  CHECK(std::isfinite(f.micro));
  CHECK(std::isfinite(f.macro));
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("label file") {
  std::istringstream in("# node label\n0 1\n0 2\n2 0\n0 1\n");
  const auto l = load_labels(in, 3);
  CHECK(l.label_count == 3);
  CHECK(l.labels[0] == std::vector<std::uint32_t>{1, 2});
  CHECK(l.labels[1].empty());
  std::istringstream bad("5 1\n");
  CHECK_THROWS_AS(load_labels(bad, 3), ParseError);
  std::istringstream junk("0 a\n");
  CHECK_THROWS_AS(load_labels(junk, 3), ParseError);
}
