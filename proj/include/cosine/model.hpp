#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cosine/groupmap.hpp"

namespace cosine {

enum class Role { vertex, context };

/// Trainable state of a compressed model: two group-embedding tables
/// (group_count x dim) and one aggregation kernel row per node (set_size
/// weights) shared by the vertex and context roles.
class ModelParameters {
 public:
  ModelParameters() = default;
  ModelParameters(std::size_t group_count, std::size_t node_count, std::size_t dim, std::size_t set_size);

  std::size_t group_count() const { return group_count_; }
  std::size_t node_count() const { return node_count_; }
  std::size_t dim() const { return dim_; }
  std::size_t set_size() const { return set_size_; }
  // 2 * group_count * dim + node_count * set_size
  std::size_t parameter_count() const { return vertex_.size() + context_.size() + kernels_.size(); }

  std::span<double> group_row(Role role, GroupId g) {
    auto& table = role == Role::vertex ? vertex_ : context_;
    return {table.data() + std::size_t{g} * dim_, dim_};
  }
  std::span<const double> group_row(Role role, GroupId g) const {
    const auto& table = role == Role::vertex ? vertex_ : context_;
    return {table.data() + std::size_t{g} * dim_, dim_};
  }
  std::span<double> kernel_row(NodeId v) { return {kernels_.data() + std::size_t{v} * set_size_, set_size_}; }
  std::span<const double> kernel_row(NodeId v) const {
    return {kernels_.data() + std::size_t{v} * set_size_, set_size_};
  }

  std::vector<double>& vertex_table() { return vertex_; }
  std::vector<double>& context_table() { return context_; }
  std::vector<double>& kernels() { return kernels_; }
  const std::vector<double>& vertex_table() const { return vertex_; }
  const std::vector<double>& context_table() const { return context_; }
  const std::vector<double>& kernels() const { return kernels_; }

  bool all_finite() const;

 private:
  std::size_t group_count_ = 0;
  std::size_t node_count_ = 0;
  std::size_t dim_ = 0;
  std::size_t set_size_ = 0;
  std::vector<double> vertex_;
  std::vector<double> context_;
  std::vector<double> kernels_;
};

/// Vertex table uniform in [-0.5/dim, 0.5/dim], context table zero, kernels
/// 1/set_size except padding slots of `table` (when given), which start at 0.
/// Warns when the model would not be smaller than a dim-sized lookup table.
ModelParameters init_model(std::size_t group_count, std::size_t node_count, std::size_t dim, std::size_t set_size,
                           std::uint64_t seed, const GroupSetTable* table = nullptr);

/// tanh(sum_i kernel[i] * row(role, gset[i])) written into out (size dim).
void aggregate(const ModelParameters& params, std::span<const GroupId> gset, std::span<const double> kernel,
               Role role, std::span<double> out);
std::vector<double> aggregate(const ModelParameters& params, std::span<const GroupId> gset,
                              std::span<const double> kernel, Role role);

std::vector<double> node_embedding(const ModelParameters& params, const GroupSetTable& table, NodeId v);

/// Dense row-major node embeddings.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  std::span<const double> row(NodeId v) const { return {data.data() + std::size_t{v} * dim, dim}; }
  std::span<double> row(NodeId v) { return {data.data() + std::size_t{v} * dim, dim}; }
};

/// Vertex-role embeddings for every node.
EmbeddingMatrix export_embeddings(const ModelParameters& params, const GroupSetTable& table);

/// Text: "node_count dim" header, then "id v1 ... vd" per node with 6
/// significant digits.
void save_embeddings(const EmbeddingMatrix& emb, std::ostream& out);
void save_embeddings_file(const EmbeddingMatrix& emb, const std::string& path);
EmbeddingMatrix load_embeddings(std::istream& in);
EmbeddingMatrix load_embeddings_file(const std::string& path);

/// Raw checkpoint: "CSNM", version byte, four u64 shape fields, then the
/// vertex, context and kernel tables as f64.
void save_checkpoint(const ModelParameters& params, std::ostream& out);
ModelParameters load_checkpoint(std::istream& in);

/// Parameter accounting for a compressed model against a lookup baseline.
struct Budget {
  std::size_t dim = 8;
  std::size_t set_size = 5;
  std::size_t node_count = 0;
  std::size_t group_count = 0;

  // set_size * |V| + 2 * dim * |G|
  std::uint64_t compressed() const;
  // 2 * reference_dim * |V|
  std::uint64_t uncompressed(std::size_t reference_dim) const;
  // compressed / uncompressed
  double ratio(std::size_t reference_dim) const;
  // The compressed model is smaller than a lookup model of the same dim.
  bool compresses() const { return compressed() < uncompressed(dim); }
};

/// Group count solving set_size*|V| + 2*dim*|G| = 2*reference_dim*|V|,
/// clamped to [set_size, node_count / min_group_size] (and to node_count).
std::size_t default_group_count(std::size_t node_count, std::size_t set_size, std::size_t dim,
                                std::size_t reference_dim = 100, std::size_t min_group_size = 20);

/// Lookup dimension whose 2*d'*|V| is closest to the compressed count.
std::size_t matched_lookup_dim(const Budget& budget);

}  // namespace cosine
