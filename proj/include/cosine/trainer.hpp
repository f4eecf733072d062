#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "cosine/model.hpp"
#include "cosine/sampler.hpp"

namespace cosine {

struct TrainConfig {
  double learning_rate = 0.025;
  // The rate decays linearly to learning_rate * min_lr_fraction.
  double min_lr_fraction = 1e-4;
  // LINE: epochs over the arcs. Walk methods: iterations over the corpus;
  // 0.2 trains once on the first 20% of walks.
  double epochs = 1.0;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  // Kernel-gradient guard G of the kernel learning-rate policy.
  double kernel_grad_guard = 5.0;
  std::uint64_t trace_interval = 100000;
  // Receives (pairs processed, mean loss since the previous report).
  std::function<void(std::uint64_t, double)> on_trace;

  void validate() const;
};

struct TrainResult {
  std::uint64_t pairs = 0;
  std::vector<std::pair<std::uint64_t, double>> loss_trace;
  double mean_loss = 0;  // over the whole run
};

/// Gradient of the pair loss with respect to every parameter it touches.
/// Rows are laid out slot by slot: vertex_rows[i*dim ...] belongs to the
/// vertex row of v's i-th group, context_rows[(c*n + i)*dim ...] to the
/// context row of the i-th group of context c (c = 0 is u, then negatives).
struct PairGradient {
  double loss = 0;
  std::vector<double> vertex_rows;
  std::vector<double> vertex_kernel;   // d loss / d kernel(v) through the vertex role
  std::vector<double> context_rows;
  std::vector<double> context_kernel;  // (1 + K) x n, through the context role
};

/// -log s(f_C(u).f(v)) - sum_neg log s(-f_C(neg).f(v)); s clamped to
/// [1e-7, 1 - 1e-7] before the log.
double sgns_loss(const ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                 std::span<const NodeId> negatives);

PairGradient pair_gradient(const ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                           std::span<const NodeId> negatives);

/// Gradient scattered into a parameter-shaped object (duplicates summed).
ModelParameters dense_gradient(const ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                               std::span<const NodeId> negatives);

/// base_lr / max(1, ||kernel_row||_2).
double adjusted_lr(double base_lr, std::span<const double> kernel_row);

/// Per-slot multipliers for one node's kernel update. With m = max |grad|:
/// m > guard scales every slot by guard/m; m < 0.1*guard doubles the slot
/// with the largest |grad|; otherwise all ones. All-zero input is unchanged.
std::vector<double> kernel_lr_policy(std::span<const double> kernel_grads, double guard);

/// One SGD step on a pair. All gradients come from a single read of the
/// touched rows; kernels, vertex rows and context rows are then written in
/// that order without locking. Group-row steps use adjusted_lr of the owning
/// node's kernel; kernel steps use kernel_lr_policy; padding slots keep their
/// zero kernel weight. Returns the pre-update loss. Throws NumericError if a
/// written value is not finite.
double train_pair(ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                  std::span<const NodeId> negatives, double lr, double kernel_grad_guard = 5.0);

/// Asynchronous SGD over the configured sample budget. Workers share the
/// parameter tables and write without locks (lost updates are tolerated).
/// With one worker the run is deterministic for a given seed.
TrainResult train(const Graph& g, const GroupSetTable& table, ModelParameters& params, const SamplerConfig& sampler,
                  const TrainConfig& cfg, const WalkCorpus* walks = nullptr);

/// Plain embedding-lookup model (one vertex and one context vector per node),
/// the uncompressed baseline.
struct LookupModel {
  std::size_t node_count = 0;
  std::size_t dim = 0;
  std::vector<double> vertex;
  std::vector<double> context;

  std::size_t parameter_count() const { return vertex.size() + context.size(); }
};

LookupModel init_lookup(std::size_t node_count, std::size_t dim, std::uint64_t seed);
double lookup_train_pair(LookupModel& model, NodeId u, NodeId v, std::span<const NodeId> negatives, double lr);
TrainResult train_lookup(const Graph& g, LookupModel& model, const SamplerConfig& sampler, const TrainConfig& cfg,
                         const WalkCorpus* walks = nullptr);
EmbeddingMatrix lookup_embeddings(const LookupModel& model);

}  // namespace cosine
