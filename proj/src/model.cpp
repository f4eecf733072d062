#include "cosine/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cosine {

namespace {

constexpr char kCheckpointMagic[4] = {'C', 'S', 'N', 'M'};
constexpr std::uint8_t kCheckpointVersion = 1;

template <class T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_raw(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError("truncated checkpoint");
  return value;
}

}  // namespace

ModelParameters::ModelParameters(std::size_t group_count, std::size_t node_count, std::size_t dim,
                                 std::size_t set_size)
    : group_count_(group_count),
      node_count_(node_count),
      dim_(dim),
      set_size_(set_size),
      vertex_(group_count * dim, 0.0),
      context_(group_count * dim, 0.0),
      kernels_(node_count * set_size, 0.0) {}

bool ModelParameters::all_finite() const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(vertex_) && finite(context_) && finite(kernels_);
}

ModelParameters init_model(std::size_t group_count, std::size_t node_count, std::size_t dim, std::size_t set_size,
                           std::uint64_t seed, const GroupSetTable* table) {
  if (group_count == 0 || node_count == 0 || dim == 0 || set_size == 0)
    throw std::invalid_argument("model shape must be positive");
  if (table && (table->node_count() != node_count || table->set_size() != set_size))
    throw std::invalid_argument("group-set table does not match model shape");

  const Budget budget{dim, set_size, node_count, group_count};
  if (!budget.compresses())
    warn("compressed model (" + std::to_string(budget.compressed()) + " parameters) is not smaller than a " +
         std::to_string(dim) + "-dimensional lookup model (" + std::to_string(budget.uncompressed(dim)) + ")");

  ModelParameters params(group_count, node_count, dim, set_size);
  Rng rng = make_rng(seed, 0);
  const double half_width = 0.5 / static_cast<double>(dim);
  for (double& x : params.vertex_table()) x = (uniform_real(rng) * 2.0 - 1.0) * half_width;

  const double uniform_weight = 1.0 / static_cast<double>(set_size);
  for (NodeId v = 0; v < node_count; ++v) {
    auto row = params.kernel_row(v);
    for (std::size_t i = 0; i < set_size; ++i) row[i] = table && table->is_padding(v, i) ? 0.0 : uniform_weight;
  }
  return params;
}

void aggregate(const ModelParameters& params, std::span<const GroupId> gset, std::span<const double> kernel,
               Role role, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < gset.size(); ++i) {
    const auto row = params.group_row(role, gset[i]);
    const double lambda = kernel[i];
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += lambda * row[j];
  }
  for (double& x : out) x = std::tanh(x);
}

std::vector<double> aggregate(const ModelParameters& params, std::span<const GroupId> gset,
                              std::span<const double> kernel, Role role) {
  std::vector<double> out(params.dim());
  aggregate(params, gset, kernel, role, out);
  return out;
}

std::vector<double> node_embedding(const ModelParameters& params, const GroupSetTable& table, NodeId v) {
  return aggregate(params, table.set(v), params.kernel_row(v), Role::vertex);
}

EmbeddingMatrix export_embeddings(const ModelParameters& params, const GroupSetTable& table) {
  EmbeddingMatrix emb{params.node_count(), params.dim(), std::vector<double>(params.node_count() * params.dim())};
  for (NodeId v = 0; v < params.node_count(); ++v)
    aggregate(params, table.set(v), params.kernel_row(v), Role::vertex, emb.row(v));
  return emb;
}

void save_embeddings(const EmbeddingMatrix& emb, std::ostream& out) {
  out << emb.rows << ' ' << emb.dim << '\n';
  char buf[32];
  for (NodeId v = 0; v < emb.rows; ++v) {
    out << v;
    for (double x : emb.row(v)) {
      std::snprintf(buf, sizeof(buf), " %.6g", x);
      out << buf;
    }
    out << '\n';
  }
}

void save_embeddings_file(const EmbeddingMatrix& emb, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  save_embeddings(emb, out);
}

EmbeddingMatrix load_embeddings(std::istream& in) {
  EmbeddingMatrix emb;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("embedding file is empty");
  std::istringstream header(line);
  if (!(header >> emb.rows >> emb.dim) || emb.dim == 0) throw ParseError("expected 'node_count dim' header", 1);
  emb.data.assign(emb.rows * emb.dim, 0.0);
  std::vector<char> seen(emb.rows, 0);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::size_t id = 0;
    if (!(fields >> id) || id >= emb.rows) throw ParseError("invalid node id", line_no);
    auto row = emb.row(static_cast<NodeId>(id));
    for (double& x : row)
      if (!(fields >> x)) throw ParseError("expected " + std::to_string(emb.dim) + " values", line_no);
    std::string extra;
    if (fields >> extra) throw ParseError("too many values", line_no);
    seen[id] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw ParseError("embedding file is missing nodes");
  return emb;
}

EmbeddingMatrix load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings '" + path + "'");
  return load_embeddings(in);
}

void save_checkpoint(const ModelParameters& params, std::ostream& out) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_raw(out, kCheckpointVersion);
  for (std::uint64_t field : {params.group_count(), params.node_count(), params.dim(), params.set_size()})
    write_raw(out, field);
  for (const auto* table : {&params.vertex_table(), &params.context_table(), &params.kernels()})
    out.write(reinterpret_cast<const char*>(table->data()), static_cast<std::streamsize>(table->size() * sizeof(double)));
}

ModelParameters load_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) throw ParseError("not a CSNM checkpoint");
  if (read_raw<std::uint8_t>(in) != kCheckpointVersion) throw ParseError("unsupported checkpoint version");
  const auto groups = read_raw<std::uint64_t>(in);
  const auto nodes = read_raw<std::uint64_t>(in);
  const auto dim = read_raw<std::uint64_t>(in);
  const auto set_size = read_raw<std::uint64_t>(in);
  ModelParameters params(groups, nodes, dim, set_size);
  for (auto* table : {&params.vertex_table(), &params.context_table(), &params.kernels()})
    if (!in.read(reinterpret_cast<char*>(table->data()), static_cast<std::streamsize>(table->size() * sizeof(double))))
      throw ParseError("truncated checkpoint");
  return params;
}

std::uint64_t Budget::compressed() const {
  return std::uint64_t{set_size} * node_count + 2ull * dim * group_count;
}

std::uint64_t Budget::uncompressed(std::size_t reference_dim) const { return 2ull * reference_dim * node_count; }

double Budget::ratio(std::size_t reference_dim) const {
  return static_cast<double>(compressed()) / static_cast<double>(uncompressed(reference_dim));
}

std::size_t default_group_count(std::size_t node_count, std::size_t set_size, std::size_t dim,
                                std::size_t reference_dim, std::size_t min_group_size) {
  const double target = (2.0 * static_cast<double>(reference_dim) - static_cast<double>(set_size)) *
                        static_cast<double>(node_count) / (2.0 * static_cast<double>(dim));
  const std::size_t upper = std::max<std::size_t>(1, node_count / std::max<std::size_t>(1, min_group_size));
  auto groups = static_cast<std::size_t>(std::max(1.0, std::floor(target)));
  groups = std::min(groups, upper);
  groups = std::max(groups, set_size);
  return std::min(groups, node_count);
}

std::size_t matched_lookup_dim(const Budget& budget) {
  const double exact = static_cast<double>(budget.compressed()) / (2.0 * static_cast<double>(budget.node_count));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(exact)));
}

}  // namespace cosine
