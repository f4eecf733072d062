#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "cosine/sampler.hpp"
#include "fixtures.hpp"

using namespace cosine;

namespace {

// Every outcome's count within 3 sigma of its multinomial expectation.
void check_frequencies(const std::vector<double>& weights, const std::vector<std::size_t>& counts, std::size_t draws) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double p = weights[i] / total;
    const double sigma = std::sqrt(draws * p * (1 - p));
    CHECK(std::abs(static_cast<double>(counts[i]) - draws * p) <= 3 * sigma + 1e-9);
  }
}

std::vector<TrainingPair> pairs_of(const std::vector<NodeId>& walk, std::size_t w) {
  std::vector<TrainingPair> out;
  window_pairs(walk, w, out);
  return out;
}

}  // namespace

TEST_CASE("alias table matches its weights") {
  const std::vector<std::vector<double>> cases{
      {1, 1, 1, 1}, {3, 1}, {0.1, 0.2, 0.3, 0.4}, {5, 0, 1, 0, 2}, {1e-3, 1, 1e3}, {7}};
  Rng rng(99);
  for (const auto& w : cases) {
    const AliasTable table(w);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(table.probability(i) == doctest::Approx(w[i] / total));
    const std::size_t draws = 100000;
    std::vector<std::size_t> counts(w.size(), 0);
    for (std::size_t d = 0; d < draws; ++d) ++counts[table.sample(rng)];
    check_frequencies(w, counts, draws);
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] == 0) CHECK(counts[i] == 0);
  }
  CHECK_THROWS_AS(AliasTable(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{1, -1}), std::invalid_argument);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{1, NAN}), std::invalid_argument);
}

TEST_CASE("LINE stream") {
  const Graph single = build_graph(2, std::vector<Edge>{{0, 1}}, true);
  LinePairStream s(single, 1);
  for (int i = 0; i < 100; ++i) CHECK(s.next() == TrainingPair{0, 1});

  const Graph two = build_graph(4, std::vector<Edge>{{0, 1, 3.0}, {2, 3, 1.0}}, true);
  LinePairStream t(two, 2);
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += t.next() == TrainingPair{0, 1};
  CHECK(std::abs(first / 10000.0 - 0.75) <= 0.02);

  CHECK(EdgeSampler(fixtures::karate()).epoch_size() == 156);
  CHECK_THROWS_AS(EdgeSampler(build_graph(3, std::vector<Edge>{}, false)), std::invalid_argument);
}

TEST_CASE("window pairs") {
  const auto p = pairs_of({0, 1, 2}, 1);
  CHECK(p == std::vector<TrainingPair>{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
  CHECK(pairs_of({4}, 3).empty());
  CHECK(pairs_of({0, 1, 2, 3, 4}, 2).size() == 14);
  CHECK(window_pair_count(5, 2) == 14);

  // Enumeration oracle: sum over positions of min(w, left) + min(w, right).
  for (std::size_t t = 0; t < 30; ++t)
    for (std::size_t w = 1; w < 8; ++w) {
      std::size_t expected = 0;
      for (std::size_t i = 0; i < t; ++i) expected += std::min(w, i) + std::min(w, t - 1 - i);
      CHECK(window_pair_count(t, w) == expected);
      std::vector<NodeId> walk(t);
      std::iota(walk.begin(), walk.end(), NodeId{0});
      const auto emitted = pairs_of(walk, w);
      CHECK(emitted.size() == expected);
      std::multiset<std::pair<NodeId, NodeId>> seen;
      for (const auto& pr : emitted) seen.insert({pr.context, pr.vertex});
      for (const auto& pr : emitted) CHECK(seen.count({pr.vertex, pr.context}) == seen.count({pr.context, pr.vertex}));
    }
}

TEST_CASE("node2vec transition weights") {
  // Triangle 0-1-2 with pendant 1-3.
  const Graph g = build_graph(4, std::vector<Edge>{{0, 1}, {1, 2}, {2, 0}, {1, 3}}, false);
  const double p = 2.0, q = 4.0;
  const Node2VecWalker walker(g, p, q);
  std::map<NodeId, double> w;
  for (auto [x, weight] : walker.transition_weights(0, 1)) w[x] += weight;
  CHECK(w.size() == 3);
  CHECK(w[0] == doctest::Approx(1 / p));
  CHECK(w[2] == doctest::Approx(1.0));
  CHECK(w[3] == doctest::Approx(1 / q));
  CHECK(walker.adjacent(0, 2));
  CHECK_FALSE(walker.adjacent(0, 3));
}

TEST_CASE("node2vec with p = q = 1 is a first-order walk") {
  const Graph g = fixtures::karate();
  const Node2VecWalker walker(g, 1.0, 1.0);
  for (NodeId prev = 0; prev < g.node_count(); ++prev) {
    const auto nb = g.neighbors(prev);
    for (NodeId cur : nb.targets) {
      const auto w = walker.transition_weights(prev, cur);
      const auto cur_nb = g.neighbors(cur);
      REQUIRE(w.size() == cur_nb.size());
      for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i].second == cur_nb.weights[i]);
    }
  }
}

TEST_CASE("node2vec with a huge return parameter keeps advancing on a path") {
  const Graph g = fixtures::path(60);
  const Node2VecWalker walker(g, 1e9, 1.0);
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const auto w = walker.walk(0, 40, rng);
    REQUIRE(w.size() == 40);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == i);
  }
}

TEST_CASE("negative sampler") {
  const Graph four = build_graph(4, std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {1, 3}}, false);
  const NegativeSampler uniform(four, 0.0);
  Rng rng(8);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 10000; ++i) ++counts[uniform.sample(rng)];
  for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.25) <= 0.02);

  const NegativeSampler linear(fixtures::star(4), 1.0);
  int center = 0;
  for (int i = 0; i < 10000; ++i) center += linear.sample(rng) == 0;
  CHECK(std::abs(center / 10000.0 - 0.5) <= 0.02);
  CHECK(linear.probability(0) == doctest::Approx(0.5));

  const NegativeSampler def(fixtures::star(4), 0.75);
  CHECK(def.probability(0) == doctest::Approx(std::pow(4.0, 0.75) / (std::pow(4.0, 0.75) + 4)));
}

TEST_CASE("walk corpus") {
  const Graph g = fixtures::karate();
  SamplerConfig cfg;
  cfg.method = Method::deepwalk;
  cfg.walk_length = 10;
  cfg.walks_per_vertex = 3;
  const WalkCorpus a(g, cfg, 5);
  CHECK(a.size() == 3 * 34);
  std::vector<int> root_hits(34, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto w = a.walk(i);
    REQUIRE(w.size() == 10);
    CHECK(w[0] == a.root(i));
    for (std::size_t j = 1; j < w.size(); ++j) {
      const auto nb = g.neighbors(w[j - 1]);
      CHECK(std::find(nb.targets.begin(), nb.targets.end(), w[j]) != nb.targets.end());
    }
    ++root_hits[a.root(i)];
  }
  for (int h : root_hits) CHECK(h == 3);

  const WalkCorpus b(g, cfg, 5);
  for (std::size_t i = 0; i < a.size(); i += 7) CHECK(a.walk(i) == b.walk(i));

  std::stringstream buf;
  save_walks(a, buf);
  const WalkCorpus c = load_walks(buf);
  CHECK(c.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(c.walk(i) == a.walk(i));
}

TEST_CASE("walk pair stream honours the walk limit") {
  const WalkCorpus corpus(std::vector<std::vector<NodeId>>{{0, 1, 2}, {2, 3}, {5}});
  WalkPairStream all(corpus, 1);
  std::vector<TrainingPair> got;
  TrainingPair pr{};
  while (all.next(pr)) got.push_back(pr);
  CHECK(got == std::vector<TrainingPair>{{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2}});
  WalkPairStream first(corpus, 1, 1);
  std::size_t n = 0;
  while (first.next(pr)) ++n;
  CHECK(n == 4);
}

TEST_CASE("sampler config validation") {
  SamplerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.p = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.window = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.negative_exponent = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(parse_method("node2vec") == Method::node2vec);
  CHECK(method_name(Method::line2) == "line2");
  CHECK_THROWS_AS(parse_method("sdne"), std::invalid_argument);
}
