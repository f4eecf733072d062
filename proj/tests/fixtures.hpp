#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "cosine/graph.hpp"

namespace fixtures {

using cosine::Edge;
using cosine::Graph;
using cosine::NodeId;

inline std::string data_path(const std::string& name) { return std::string(COSINE_TEST_DATA) + "/" + name; }

inline Graph karate() { return cosine::load_edge_list_file(data_path("karate.edges"), false).graph; }

// `count` disjoint cliques of `size` nodes; clique c holds ids [c*size, (c+1)*size).
inline Graph cliques(std::size_t count, std::size_t size) {
  std::vector<Edge> edges;
  for (std::size_t c = 0; c < count; ++c)
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = i + 1; j < size; ++j)
        edges.push_back({static_cast<NodeId>(c * size + i), static_cast<NodeId>(c * size + j)});
  return cosine::build_graph(count * size, edges, false);
}

inline Graph path(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(i + 1)});
  return cosine::build_graph(n, edges, false);
}

// Center 0, leaves 1..leaves.
inline Graph star(std::size_t leaves) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i <= leaves; ++i) edges.push_back({0, static_cast<NodeId>(i)});
  return cosine::build_graph(leaves + 1, edges, false);
}

// Erdos-Renyi G(n, p).
inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  cosine::Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (cosine::uniform_real(rng) < p) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
  return cosine::build_graph(n, edges, false);
}

// Stochastic block model with equal blocks; node v is in block v / (n / blocks).
inline Graph sbm(std::size_t n, std::size_t blocks, double p_in, double p_out, std::uint64_t seed) {
  cosine::Rng rng(seed);
  const std::size_t per = n / blocks;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = i / per == j / per ? p_in : p_out;
      if (cosine::uniform_real(rng) < p) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  return cosine::build_graph(n, edges, false);
}

// |a - b| relative to the larger magnitude, with `floor` guarding values near zero.
inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({floor, std::abs(a), std::abs(b)});
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cosine-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
