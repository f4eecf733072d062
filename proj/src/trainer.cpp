#include "cosine/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <stdexcept>

#include "parallel.hpp"

namespace cosine {

namespace {

constexpr double kSigmoidClamp = 1e-7;
constexpr std::size_t kLineChunk = 10000;
constexpr std::size_t kWalkChunk = 8;
constexpr std::uint64_t kProgressFlush = 1000;

// Unsynchronized shared access. Relaxed atomics compile to plain loads and
// stores but keep concurrent workers free of undefined behavior.
inline double shared_load(const double& x) {
  return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
}
inline void shared_store(double& x, double value) {
  std::atomic_ref<double>(x).store(value, std::memory_order_relaxed);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double clamped_log_sigmoid(double z) { return std::log(std::clamp(sigmoid(z), kSigmoidClamp, 1.0 - kSigmoidClamp)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Copy of every parameter one pair update reads. Context 0 is the positive
// context u, contexts 1..K the negatives.
struct Snapshot {
  std::size_t dim = 0;
  std::size_t set = 0;
  std::vector<NodeId> contexts;
  std::vector<double> vertex_kernel;   // n
  std::vector<double> vertex_rows;     // n x d
  std::vector<double> context_kernel;  // C x n
  std::vector<double> context_rows;    // C x n x d
};

void read_snapshot(const ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                   std::span<const NodeId> negatives, bool shared, Snapshot& s) {
  const std::size_t n = params.set_size();
  const std::size_t d = params.dim();
  auto read = [shared](const double& x) { return shared ? shared_load(x) : x; };
  s.dim = d;
  s.set = n;
  s.contexts.assign(1, u);
  s.contexts.insert(s.contexts.end(), negatives.begin(), negatives.end());
  const std::size_t c_count = s.contexts.size();

  s.vertex_kernel.resize(n);
  s.vertex_rows.resize(n * d);
  const auto vset = table.set(v);
  const auto vkernel = params.kernel_row(v);
  for (std::size_t i = 0; i < n; ++i) {
    s.vertex_kernel[i] = read(vkernel[i]);
    const auto row = params.group_row(Role::vertex, vset[i]);
    for (std::size_t j = 0; j < d; ++j) s.vertex_rows[i * d + j] = read(row[j]);
  }
  s.context_kernel.resize(c_count * n);
  s.context_rows.resize(c_count * n * d);
  for (std::size_t c = 0; c < c_count; ++c) {
    const NodeId x = s.contexts[c];
    const auto xset = table.set(x);
    const auto xkernel = params.kernel_row(x);
    for (std::size_t i = 0; i < n; ++i) {
      s.context_kernel[c * n + i] = read(xkernel[i]);
      const auto row = params.group_row(Role::context, xset[i]);
      for (std::size_t j = 0; j < d; ++j) s.context_rows[(c * n + i) * d + j] = read(row[j]);
    }
  }
}

// Scratch vectors reused across pairs by one worker.
struct Workspace {
  Snapshot snap;
  PairGradient grad;
  std::vector<double> f;       // f(S_v)
  std::vector<double> h;       // f_C(S_x) of the current context
  std::vector<double> d_f;     // dL/df(S_v)
  std::vector<double> d_b;     // dL/d pre-activation of the current context
};

void aggregate_rows(std::span<const double> kernel, std::span<const double> rows, std::size_t d, std::vector<double>& out) {
  out.assign(d, 0.0);
  for (std::size_t i = 0; i < kernel.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += kernel[i] * rows[i * d + j];
  for (double& x : out) x = std::tanh(x);
}

// Loss and gradient from a snapshot; the math behind pair_gradient and
// train_pair.
void gradient_from_snapshot(Workspace& ws) {
  const Snapshot& s = ws.snap;
  PairGradient& g = ws.grad;
  const std::size_t n = s.set;
  const std::size_t d = s.dim;
  const std::size_t c_count = s.contexts.size();

  aggregate_rows(s.vertex_kernel, s.vertex_rows, d, ws.f);
  ws.d_f.assign(d, 0.0);
  g.loss = 0;
  g.context_rows.assign(c_count * n * d, 0.0);
  g.context_kernel.assign(c_count * n, 0.0);
  ws.d_b.resize(d);

  for (std::size_t c = 0; c < c_count; ++c) {
    const std::span<const double> kernel(s.context_kernel.data() + c * n, n);
    const std::span<const double> rows(s.context_rows.data() + c * n * d, n * d);
    aggregate_rows(kernel, rows, d, ws.h);
    const double score = dot(ws.h, ws.f);
    const bool positive = c == 0;
    g.loss -= clamped_log_sigmoid(positive ? score : -score);
    // dL/dscore
    const double coeff = sigmoid(score) - (positive ? 1.0 : 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      ws.d_f[j] += coeff * ws.h[j];
      ws.d_b[j] = coeff * ws.f[j] * (1.0 - ws.h[j] * ws.h[j]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double kgrad = 0;
      for (std::size_t j = 0; j < d; ++j) {
        g.context_rows[(c * n + i) * d + j] = kernel[i] * ws.d_b[j];
        kgrad += ws.d_b[j] * rows[i * d + j];
      }
      g.context_kernel[c * n + i] = kgrad;
    }
  }

  g.vertex_rows.assign(n * d, 0.0);
  g.vertex_kernel.assign(n, 0.0);
  for (std::size_t j = 0; j < d; ++j) ws.d_f[j] *= 1.0 - ws.f[j] * ws.f[j];  // now dL/da(S_v)
  for (std::size_t i = 0; i < n; ++i) {
    double kgrad = 0;
    for (std::size_t j = 0; j < d; ++j) {
      g.vertex_rows[i * d + j] = s.vertex_kernel[i] * ws.d_f[j];
      kgrad += ws.d_f[j] * s.vertex_rows[i * d + j];
    }
    g.vertex_kernel[i] = kgrad;
  }
}

[[noreturn]] void report_non_finite(const char* table, NodeId u, NodeId v) {
  throw NumericError(std::string("non-finite value written to ") + table + " while training pair (" + std::to_string(u) +
                     ", " + std::to_string(v) + ")");
}

void step_kernel(ModelParameters& params, const GroupSetTable& table, NodeId node, std::span<const double> grads,
                 double lr, double guard, NodeId u, NodeId v) {
  const auto scale = kernel_lr_policy(grads, guard);
  auto row = params.kernel_row(node);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i] == 0.0 || table.is_padding(node, i)) continue;
    const double updated = shared_load(row[i]) - lr * scale[i] * grads[i];
    if (!std::isfinite(updated)) report_non_finite("kernels", u, v);
    shared_store(row[i], updated);
  }
}

void step_rows(ModelParameters& params, Role role, std::span<const GroupId> gset, std::span<const double> grads,
               double lr, NodeId u, NodeId v) {
  const std::size_t d = params.dim();
  for (std::size_t i = 0; i < gset.size(); ++i) {
    auto row = params.group_row(role, gset[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double gj = grads[i * d + j];
      if (gj == 0.0) continue;
      const double updated = shared_load(row[j]) - lr * gj;
      if (!std::isfinite(updated)) report_non_finite(role == Role::vertex ? "vertex group embeddings" : "context group embeddings", u, v);
      shared_store(row[j], updated);
    }
  }
}

double train_pair_impl(ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                       std::span<const NodeId> negatives, double lr, double guard, Workspace& ws) {
  read_snapshot(params, table, u, v, negatives, true, ws.snap);
  gradient_from_snapshot(ws);
  const Snapshot& s = ws.snap;
  const PairGradient& g = ws.grad;
  const std::size_t n = s.set;
  const std::size_t d = s.dim;

  // (a) kernels
  step_kernel(params, table, v, g.vertex_kernel, lr, guard, u, v);
  for (std::size_t c = 0; c < s.contexts.size(); ++c)
    step_kernel(params, table, s.contexts[c], std::span<const double>(g.context_kernel).subspan(c * n, n), lr, guard, u, v);
  // (b) vertex group rows
  step_rows(params, Role::vertex, table.set(v), g.vertex_rows, adjusted_lr(lr, s.vertex_kernel), u, v);
  // (c) context group rows
  for (std::size_t c = 0; c < s.contexts.size(); ++c) {
    const std::span<const double> kernel(s.context_kernel.data() + c * n, n);
    step_rows(params, Role::context, table.set(s.contexts[c]),
              std::span<const double>(g.context_rows).subspan(c * n * d, n * d), adjusted_lr(lr, kernel), u, v);
  }
  return g.loss;
}

double lookup_pair_impl(LookupModel& m, NodeId u, NodeId v, std::span<const NodeId> negatives, double lr,
                        std::vector<double>& vbuf, std::vector<double>& dvbuf) {
  const std::size_t d = m.dim;
  vbuf.resize(d);
  dvbuf.assign(d, 0.0);
  double* vrow = m.vertex.data() + std::size_t{v} * d;
  for (std::size_t j = 0; j < d; ++j) vbuf[j] = shared_load(vrow[j]);
  double loss = 0;
  auto visit = [&](NodeId x, bool positive) {
    double* crow = m.context.data() + std::size_t{x} * d;
    double score = 0;
    for (std::size_t j = 0; j < d; ++j) score += shared_load(crow[j]) * vbuf[j];
    loss -= clamped_log_sigmoid(positive ? score : -score);
    const double coeff = sigmoid(score) - (positive ? 1.0 : 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      const double cj = shared_load(crow[j]);
      dvbuf[j] += coeff * cj;
      const double updated = cj - lr * coeff * vbuf[j];
      if (!std::isfinite(updated)) report_non_finite("lookup context table", u, v);
      shared_store(crow[j], updated);
    }
  };
  visit(u, true);
  for (NodeId x : negatives) visit(x, false);
  for (std::size_t j = 0; j < d; ++j) {
    const double updated = shared_load(vrow[j]) - lr * dvbuf[j];
    if (!std::isfinite(updated)) report_non_finite("lookup vertex table", u, v);
    shared_store(vrow[j], updated);
  }
  return loss;
}

// Shared progress counters: processed pairs drive the learning-rate decay and
// the loss trace.
class Progress {
 public:
  Progress(const TrainConfig& cfg, std::uint64_t expected_pairs) : cfg_(cfg), expected_(std::max<std::uint64_t>(1, expected_pairs)) {}

  double learning_rate() const {
    const double done = static_cast<double>(processed_.load(std::memory_order_relaxed)) / static_cast<double>(expected_);
    return cfg_.learning_rate * std::max(cfg_.min_lr_fraction, 1.0 - done);
  }

  std::uint64_t flush_every() const { return std::clamp<std::uint64_t>(cfg_.trace_interval, 1, kProgressFlush); }

  void add(std::uint64_t pairs, double loss_sum) {
    if (pairs == 0) return;
    total_loss_.fetch_add(loss_sum, std::memory_order_relaxed);
    const std::uint64_t before = processed_.fetch_add(pairs, std::memory_order_relaxed);
    std::lock_guard lock(trace_mutex_);
    window_loss_ += loss_sum;
    window_pairs_ += pairs;
    const std::uint64_t interval = std::max<std::uint64_t>(1, cfg_.trace_interval);
    if ((before + pairs) / interval > before / interval) emit(before + pairs);
  }

  TrainResult finish() {
    TrainResult r;
    r.pairs = processed_.load();
    if (window_pairs_ > 0) emit(r.pairs);
    r.loss_trace = std::move(trace_);
    r.mean_loss = r.pairs ? total_loss_.load() / static_cast<double>(r.pairs) : 0.0;
    return r;
  }

 private:
  void emit(std::uint64_t at) {
    const double mean = window_loss_ / static_cast<double>(window_pairs_);
    trace_.emplace_back(at, mean);
    if (cfg_.on_trace) cfg_.on_trace(at, mean);
    window_loss_ = 0;
    window_pairs_ = 0;
  }

  const TrainConfig& cfg_;
  std::uint64_t expected_;
  std::atomic<std::uint64_t> processed_{0};
  std::atomic<double> total_loss_{0.0};
  std::mutex trace_mutex_;
  double window_loss_ = 0;
  std::uint64_t window_pairs_ = 0;
  std::vector<std::pair<std::uint64_t, double>> trace_;
};

// Per-worker accumulator flushed into Progress every kProgressFlush pairs.
struct LocalProgress {
  Progress& shared;
  std::uint64_t pairs = 0;
  double loss = 0;
  double lr;
  std::uint64_t every;

  explicit LocalProgress(Progress& p) : shared(p), lr(p.learning_rate()), every(p.flush_every()) {}
  void record(double pair_loss) {
    loss += pair_loss;
    if (++pairs == every) flush();
  }
  void flush() {
    shared.add(pairs, loss);
    pairs = 0;
    loss = 0;
    lr = shared.learning_rate();
  }
  ~LocalProgress() { flush(); }
};

// Generic driver: feeds every sampled pair with its negatives to `update`.
// update(worker, u, v, negatives, lr) returns the pair loss.
template <class Update>
TrainResult drive(const Graph& g, const SamplerConfig& scfg, const TrainConfig& cfg, const WalkCorpus* walks,
                  Update&& update) {
  scfg.validate();
  cfg.validate();
  const NegativeSampler negatives(g, scfg.negative_exponent);
  const std::uint64_t neg_seed = mix_seed(cfg.seed, 0x6e6567);

  auto draw_negatives = [&](Rng& rng, NodeId u, std::vector<NodeId>& out) {
    out.clear();
    // Redraw collisions with the positive context; give up after a few tries
    // so a graph dominated by one node still terminates.
    for (std::size_t k = 0; k < scfg.negatives; ++k) {
      NodeId x = negatives.sample(rng);
      for (int tries = 0; x == u && tries < 16; ++tries) x = negatives.sample(rng);
      if (x != u) out.push_back(x);
    }
  };

  if (scfg.method == Method::line2) {
    const EdgeSampler edges(g);
    const auto total = static_cast<std::uint64_t>(std::llround(cfg.epochs * static_cast<double>(edges.epoch_size())));
    Progress progress(cfg, total);
    const std::size_t chunks = (total + kLineChunk - 1) / kLineChunk;
    detail::parallel_chunks(chunks, cfg.workers, 1, [&](std::size_t worker, std::size_t begin, std::size_t end) {
      LocalProgress local(progress);
      std::vector<NodeId> negs;
      for (std::size_t chunk = begin; chunk < end; ++chunk) {
        Rng rng = make_rng(neg_seed, chunk);
        const std::uint64_t first = chunk * kLineChunk;
        const std::uint64_t last = std::min<std::uint64_t>(total, first + kLineChunk);
        for (std::uint64_t i = first; i < last; ++i) {
          const TrainingPair pair = edges.sample(rng);
          draw_negatives(rng, pair.context, negs);
          local.record(update(worker, pair.context, pair.vertex, negs, local.lr));
        }
      }
    });
    return progress.finish();
  }

  std::optional<WalkCorpus> generated;
  if (walks == nullptr) walks = &generated.emplace(g, scfg, cfg.seed);
  if (walks->size() == 0) return Progress(cfg, 0).finish();
  const auto total_walks = static_cast<std::size_t>(std::llround(cfg.epochs * static_cast<double>(walks->size())));
  Progress progress(cfg, std::uint64_t{total_walks} * window_pair_count(scfg.walk_length, scfg.window));
  detail::parallel_chunks(total_walks, cfg.workers, kWalkChunk, [&](std::size_t worker, std::size_t begin, std::size_t end) {
    LocalProgress local(progress);
    std::vector<NodeId> negs;
    std::vector<TrainingPair> pairs;
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_rng(neg_seed, i);
      pairs.clear();
      window_pairs(walks->walk(i % walks->size()), scfg.window, pairs);
      for (const TrainingPair& pair : pairs) {
        draw_negatives(rng, pair.context, negs);
        local.record(update(worker, pair.context, pair.vertex, negs, local.lr));
      }
    }
  });
  return progress.finish();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
  if (!(epochs >= 0)) throw std::invalid_argument("epochs must be non-negative");
  if (workers == 0) throw std::invalid_argument("worker count must be at least 1");
  if (!(kernel_grad_guard > 0)) throw std::invalid_argument("kernel gradient guard must be positive");
}

double sgns_loss(const ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                 std::span<const NodeId> negatives) {
  const auto f = node_embedding(params, table, v);
  auto context_score = [&](NodeId x) {
    return dot(aggregate(params, table.set(x), params.kernel_row(x), Role::context), f);
  };
  double loss = -clamped_log_sigmoid(context_score(u));
  for (NodeId x : negatives) loss -= clamped_log_sigmoid(-context_score(x));
  return loss;
}

PairGradient pair_gradient(const ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                           std::span<const NodeId> negatives) {
  Workspace ws;
  read_snapshot(params, table, u, v, negatives, false, ws.snap);
  gradient_from_snapshot(ws);
  return std::move(ws.grad);
}

ModelParameters dense_gradient(const ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                               std::span<const NodeId> negatives) {
  const PairGradient g = pair_gradient(params, table, u, v, negatives);
  const std::size_t n = params.set_size();
  const std::size_t d = params.dim();
  ModelParameters out(params.group_count(), params.node_count(), d, n);
  const auto vset = table.set(v);
  for (std::size_t i = 0; i < n; ++i) {
    out.kernel_row(v)[i] += g.vertex_kernel[i];
    auto row = out.group_row(Role::vertex, vset[i]);
    for (std::size_t j = 0; j < d; ++j) row[j] += g.vertex_rows[i * d + j];
  }
  for (std::size_t c = 0; c <= negatives.size(); ++c) {
    const NodeId x = c == 0 ? u : negatives[c - 1];
    const auto xset = table.set(x);
    for (std::size_t i = 0; i < n; ++i) {
      out.kernel_row(x)[i] += g.context_kernel[c * n + i];
      auto row = out.group_row(Role::context, xset[i]);
      for (std::size_t j = 0; j < d; ++j) row[j] += g.context_rows[(c * n + i) * d + j];
    }
  }
  return out;
}

double adjusted_lr(double base_lr, std::span<const double> kernel_row) {
  double sq = 0;
  for (double x : kernel_row) sq += x * x;
  return base_lr / std::max(1.0, std::sqrt(sq));
}

std::vector<double> kernel_lr_policy(std::span<const double> kernel_grads, double guard) {
  std::vector<double> scale(kernel_grads.size(), 1.0);
  double largest = 0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < kernel_grads.size(); ++i) {
    if (std::abs(kernel_grads[i]) > largest) {
      largest = std::abs(kernel_grads[i]);
      arg = i;
    }
  }
  if (largest == 0) return scale;
  if (largest > guard) {
    std::fill(scale.begin(), scale.end(), guard / largest);
  } else if (largest < 0.1 * guard) {
    scale[arg] = 2.0;
  }
  return scale;
}

double train_pair(ModelParameters& params, const GroupSetTable& table, NodeId u, NodeId v,
                  std::span<const NodeId> negatives, double lr, double kernel_grad_guard) {
  Workspace ws;
  return train_pair_impl(params, table, u, v, negatives, lr, kernel_grad_guard, ws);
}

TrainResult train(const Graph& g, const GroupSetTable& table, ModelParameters& params, const SamplerConfig& sampler,
                  const TrainConfig& cfg, const WalkCorpus* walks) {
  if (table.node_count() != g.node_count() || params.node_count() != g.node_count())
    throw std::invalid_argument("graph, group sets and model disagree on node count");
  if (table.set_size() != params.set_size() || table.group_count() > params.group_count())
    throw std::invalid_argument("group sets do not match the model shape");
  std::vector<Workspace> spaces(std::max<std::size_t>(1, cfg.workers));
  return drive(g, sampler, cfg, walks,
               [&](std::size_t worker, NodeId u, NodeId v, std::span<const NodeId> negs, double lr) {
                 return train_pair_impl(params, table, u, v, negs, lr, cfg.kernel_grad_guard, spaces[worker]);
               });
}

LookupModel init_lookup(std::size_t node_count, std::size_t dim, std::uint64_t seed) {
  if (node_count == 0 || dim == 0) throw std::invalid_argument("lookup model shape must be positive");
  LookupModel m{node_count, dim, std::vector<double>(node_count * dim), std::vector<double>(node_count * dim, 0.0)};
  Rng rng = make_rng(seed, 0);
  const double half_width = 0.5 / static_cast<double>(dim);
  for (double& x : m.vertex) x = (uniform_real(rng) * 2.0 - 1.0) * half_width;
  return m;
}

double lookup_train_pair(LookupModel& model, NodeId u, NodeId v, std::span<const NodeId> negatives, double lr) {
  std::vector<double> a, b;
  return lookup_pair_impl(model, u, v, negatives, lr, a, b);
}

TrainResult train_lookup(const Graph& g, LookupModel& model, const SamplerConfig& sampler, const TrainConfig& cfg,
                         const WalkCorpus* walks) {
  if (model.node_count != g.node_count()) throw std::invalid_argument("lookup model does not match graph");
  const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  std::vector<std::vector<double>> vb(workers), db(workers);
  return drive(g, sampler, cfg, walks,
               [&](std::size_t worker, NodeId u, NodeId v, std::span<const NodeId> negs, double lr) {
                 return lookup_pair_impl(model, u, v, negs, lr, vb[worker], db[worker]);
               });
}

EmbeddingMatrix lookup_embeddings(const LookupModel& model) {
  return {model.node_count, model.dim, model.vertex};
}

}  // namespace cosine
