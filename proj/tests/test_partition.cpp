#include <sstream>

#include "doctest.h"
#include "cosine/partition.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cosine;

TEST_CASE("size cap") {
  CHECK(group_size_cap(34, 4, 0.05) == 9);
  CHECK(group_size_cap(8, 2, 0.1) == 4);
  CHECK(group_size_cap(10, 3, 0.0) == 4);
  CHECK(group_size_cap(100, 10, 0.1) == 11);
}

TEST_CASE("two disjoint 4-cliques split by clique from any seed") {
  const Graph g = fixtures::cliques(2, 4);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Partition p = partition_label_propagation(g, 2, 0.1, 25, seed);
    CHECK(partition_quality(g, p).edge_cut == 0.0);
    CHECK(p.group_of[0] == p.group_of[3]);
    CHECK(p.group_of[4] == p.group_of[7]);
    CHECK(p.group_of[0] != p.group_of[4]);
  }
}

TEST_CASE("edgeless graph keeps its initial deal") {
  const Graph g = build_graph(6, std::vector<Edge>{}, false);
  const Partition p = partition_label_propagation(g, 3, 0.05, 10, 1);
  CHECK(p.group_count == 3);
  CHECK(p.group_sizes() == std::vector<std::size_t>{2, 2, 2});
}

TEST_CASE("karate with k=4") {
  const Graph g = fixtures::karate();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Partition p = partition_label_propagation(g, 4, 0.05, 25, seed);
    for (std::size_t size : p.group_sizes()) {
      CHECK(size >= 1);
      CHECK(size <= 9);
    }
    const auto q = partition_quality(g, p);
    CHECK(q.edge_cut == oracles::brute_cut(g, p));
    CHECK(q.imbalance <= 1.0);
  }
}

TEST_CASE("invariants at every round on random graphs") {
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Rng rng(trial);
    const std::size_t n = 20 + uniform_index(rng, 481);
    const double p_edge = (2.0 + 6.0 * uniform_real(rng)) / static_cast<double>(n);
    const Graph g = fixtures::random_graph(n, p_edge, trial);
    const std::size_t k = 2 + uniform_index(rng, 15);
    const double eps = 0.2 * uniform_real(rng);
    const std::size_t cap = group_size_cap(n, k, eps);
    double last_cut = std::numeric_limits<double>::infinity();
    int rounds_seen = 0;
    const Partition p = partition_label_propagation(g, k, eps, 25, trial, [&](const RoundInfo& info) {
      CHECK(info.round == rounds_seen++);
      const auto sizes = info.partition.group_sizes();
      for (std::size_t s : sizes) {
        CHECK(s >= 1);
        CHECK(s <= cap);
      }
      const double cut = oracles::brute_cut(g, info.partition);
      CHECK(cut <= last_cut);
      last_cut = cut;
    });
    CHECK(p.group_of.size() == n);
    CHECK(partition_quality(g, p).edge_cut == last_cut);
  }
}

TEST_CASE("directed graphs count both arc directions") {
  // Two directed 3-cycles joined by one arc.
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {2, 3}};
  const Graph g = build_graph(6, edges, true);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Partition p = partition_label_propagation(g, 2, 0.0, 25, seed);
    CHECK(partition_quality(g, p).edge_cut == 1.0);
  }
}

TEST_CASE("deterministic per seed") {
  const Graph g = fixtures::random_graph(300, 0.02, 5);
  const Partition a = partition_label_propagation(g, 7, 0.05, 25, 42);
  const Partition b = partition_label_propagation(g, 7, 0.05, 25, 42);
  CHECK(a.group_of == b.group_of);
}

TEST_CASE("argument errors") {
  const Graph g = fixtures::path(4);
  CHECK_THROWS_AS(partition_label_propagation(g, 0, 0.1, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(partition_label_propagation(g, 5, 0.1, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(partition_label_propagation(g, 2, -0.1, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(partition_label_propagation(g, 2, 0.1, 0, 0), std::invalid_argument);
}

TEST_CASE("quality examples") {
  const Graph cl = fixtures::cliques(2, 4);
  Partition by_clique{{0, 0, 0, 0, 1, 1, 1, 1}, 2};
  const auto q = partition_quality(cl, by_clique);
  CHECK(q.edge_cut == 0.0);
  CHECK(q.imbalance == 1.0);

  const Graph edge = build_graph(2, std::vector<Edge>{{0, 1}}, false);
  CHECK(partition_quality(edge, Partition{{0, 1}, 2}).edge_cut == 1.0);
  CHECK_THROWS(partition_quality(edge, Partition{{0}, 1}));
}

TEST_CASE("load partition") {
  std::istringstream a("0\n0\n1\n");
  const Partition p = load_partition(a, 3);
  CHECK(p.group_of == std::vector<GroupId>{0, 0, 1});
  CHECK(p.group_count == 2);

  std::vector<std::string> warnings;
  auto old = set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
  std::istringstream b("2\n2\n2\n");
  const Partition c = load_partition(b, 3);
  set_warning_handler(old);
  CHECK(c.group_count == 1);
  CHECK(c.group_of == std::vector<GroupId>{0, 0, 0});
  CHECK(warnings.size() == 1);

  std::istringstream short_file("0\n1\n");
  CHECK_THROWS_AS(load_partition(short_file, 3), ParseError);
  std::istringstream junk("0\nx\n1\n");
  CHECK_THROWS_AS(load_partition(junk, 3), ParseError);
}

TEST_CASE("partition round trip") {
  const Graph g = fixtures::karate();
  const Partition p = partition_label_propagation(g, 4, 0.05, 25, 3);
  std::stringstream buf;
  save_partition(p, buf);
  const Partition q = load_partition(buf, g.node_count());
  CHECK(q.group_of == p.group_of);
  CHECK(q.group_count == p.group_count);
}
