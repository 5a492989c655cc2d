#include "structcomp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "structcomp/compress.hpp"
#include "structcomp/data.hpp"
#include "structcomp/error.hpp"

namespace structcomp {

std::string to_string(Model m) {
  switch (m) {
    case Model::sce: return "sce";
    case Model::coles: return "coles";
    case Model::grace: return "grace";
    case Model::cca_ssg: return "cca_ssg";
  }
  return "?";
}

Model model_from_string(const std::string& s) {
  if (s == "sce") return Model::sce;
  if (s == "coles") return Model::coles;
  if (s == "grace") return Model::grace;
  if (s == "cca_ssg" || s == "cca-ssg") return Model::cca_ssg;
  throw ValidationError("unknown model '" + s + "' (expected sce, coles, grace or cca_ssg)");
}

Arch TrainConfig::resolved_arch() const {
  if (arch) return *arch;
  return multi_view() ? Arch::mlp2 : Arch::linear;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("config: " + msg); };
  if (!(lr > 0.0)) fail("lr must be positive");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (n_clusters < 0) fail("n_clusters must be >= 0");
  if (n_clusters == 0 && !(compression_rate > 0.0 && compression_rate <= 1.0))
    fail("compression_rate must lie in (0, 1]");
  if (model == Model::grace && !(tau > 0.0)) fail("tau must be positive for grace");
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) fail("drop_rate must lie in [0, 1)");
  if (K < 1) fail("K must be >= 1");
  if (num_permutations < 1) fail("num_permutations must be >= 1");
  if (hidden < 1 || embed_dim < 1) fail("hidden and embed_dim must be >= 1");
  if (checkpoint_every < 1) fail("checkpoint_every must be >= 1");
}

Index resolve_clusters(Index n, const TrainConfig& cfg) {
  if (cfg.n_clusters > 0) {
    if (cfg.n_clusters > n) {
      throw ValidationError("config: n_clusters=" + std::to_string(cfg.n_clusters) + " exceeds node count " +
                            std::to_string(n));
    }
    return cfg.n_clusters;
  }
  if (cfg.compression_rate >= 1.0) return n;
  const auto k = static_cast<Index>(std::llround(cfg.compression_rate * static_cast<double>(n)));
  return std::min(n, std::max<Index>(2, k));
}

void adam_step(std::vector<DenseMatrix>& params, const std::vector<DenseMatrix>& grads, AdamState& state, double lr,
               double weight_decay) {
  if (params.size() != grads.size()) throw ValidationError("adam_step: parameter and gradient counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(params[i], grads[i], "adam_step");
    if (!grads[i].all_finite()) {
      throw NumericalError("adam_step: non-finite gradient for weight " + std::to_string(i) + " (" +
                           shape_string(grads[i]) + ") at step " + std::to_string(state.step + 1));
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.rows(), p.cols());
      state.v.emplace_back(p.rows(), p.cols());
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].values();
    auto g = grads[i].values();
    auto m = state.m[i].values();
    auto v = state.v[i].values();
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g[j] + weight_decay * w[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * gj;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * gj * gj;
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + state.eps);
    }
  }
}

SparseGraph drop_edges(const SparseGraph& g, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("drop_edges: rate must lie in [0, 1)");
  if (rate == 0.0) return g;
  std::vector<WeightedEdge> kept;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    auto nb = g.neighbors(i);
    auto wt = g.weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] < i) continue;
      if (uniform01(rng) < rate) continue;
      kept.push_back({static_cast<NodeId>(i), nb[k], wt[k]});
    }
  }
  return build_weighted_graph(kept, g.num_nodes(), {.keep_self_loops = true});
}

// ---------------------------------------------------------------------------

struct Objective::Impl {
  TrainConfig cfg;
  bool compressed = false;
  DenseMatrix x;               // node features (full) or cluster means (compressed)
  DenseMatrix x_nodes;         // node features, for DropMember
  std::optional<Partition> partition;
  SparseGraph graph;           // full graph, for DropEdge
  SparseGraph a_hat;           // full-graph propagator
  SparseGraph l_pos;
  SparseGraph l_neg;

  std::pair<DenseMatrix, ForwardTape> forward(const DenseMatrix& in, const EncoderParams& params,
                                              const SparseGraph* prop) const {
    return prop ? gcn_forward_tape(*prop, in, params) : encoder_forward(in, params);
  }
};

Objective::Objective(const SparseGraph& g, const DenseMatrix& x, const TrainConfig& cfg,
                     std::optional<Partition> partition)
    : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  if (g.num_nodes() != x.rows()) {
    std::ostringstream os;
    os << "graph has " << g.num_nodes() << " nodes but features are " << shape_string(x);
    throw ValidationError(os.str());
  }
  Impl& s = *impl_;
  s.cfg = cfg;
  s.compressed = partition.has_value();
  const bool multi = cfg.multi_view();
  Rng neg_rng = make_rng(cfg.seed, Stream::negatives);

  if (s.compressed) {
    s.partition = std::move(partition);
    if (s.partition->num_nodes() != g.num_nodes()) throw ValidationError("partition does not match graph");
    s.x = compress_features(x, *s.partition, CompressMode::mean).matrix;
    if (multi) {
      s.x_nodes = x;
    } else {
      const Index nc = s.partition->num_clusters();
      if (cfg.model == Model::coles) {
        CompressedGraph cg = compress_graph(g, *s.partition, {.keep_self_loops = false, .binarize = !cfg.weighted_laplacian});
        s.l_pos = laplacian(cg.graph, LaplacianKind::sym_normalized);
      }
      s.l_neg = laplacian(negative_graph(nc, {cfg.num_permutations, cfg.K}, neg_rng), LaplacianKind::sym_normalized);
    }
  } else {
    s.x = x;
    s.a_hat = normalized_adjacency(g);
    if (multi) {
      s.graph = g;
    } else {
      if (cfg.model == Model::coles) s.l_pos = laplacian(g, LaplacianKind::sym_normalized);
      s.l_neg = laplacian(negative_graph(g.num_nodes(), {cfg.num_permutations, cfg.K}, neg_rng),
                          LaplacianKind::sym_normalized);
    }
  }
}

Objective::~Objective() = default;
Objective::Objective(Objective&&) noexcept = default;
Objective& Objective::operator=(Objective&&) noexcept = default;

Index Objective::num_rows() const { return impl_->x.rows(); }
Index Objective::input_dim() const { return impl_->x.cols(); }

LossValueGrad Objective::evaluate(const EncoderParams& params, Rng& rng) const {
  const Impl& s = *impl_;
  const SparseGraph* prop = s.compressed ? nullptr : &s.a_hat;
  auto [z1, t1] = s.forward(s.x, params, prop);

  LossValueGrad out;
  if (!s.cfg.multi_view()) {
    LossValueGrad lv = s.cfg.model == Model::sce ? sce_loss(z1, s.l_neg, s.cfg.alpha) : coles_loss(z1, s.l_pos, s.l_neg);
    out.value = lv.value;
    out.grads = encoder_backward(t1, params, lv.grads[0]);
    return out;
  }

  // Second view: DropMember on the compressed nodes, DropEdge on the full graph.
  SparseGraph dropped_hat;
  DenseMatrix x2;
  const DenseMatrix* in2 = &s.x;
  const SparseGraph* prop2 = nullptr;
  if (s.compressed) {
    x2 = drop_member(s.x_nodes, *s.partition, s.cfg.drop_rate, rng).matrix;
    in2 = &x2;
  } else {
    dropped_hat = s.cfg.drop_rate == 0.0 ? s.a_hat : normalized_adjacency(drop_edges(s.graph, s.cfg.drop_rate, rng));
    prop2 = &dropped_hat;
  }
  auto [z2, t2] = s.forward(*in2, params, prop2);

  LossValueGrad lv = s.cfg.model == Model::grace ? infonce_loss(z1, z2, s.cfg.tau) : cca_ssg_loss(z1, z2, s.cfg.lambda);
  out.value = lv.value;
  out.grads = encoder_backward(t1, params, lv.grads[0]);
  std::vector<DenseMatrix> g2 = encoder_backward(t2, params, lv.grads[1]);
  for (std::size_t i = 0; i < g2.size(); ++i) out.grads[i] += g2[i];
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string epoch_prefix(int epoch) { return "epoch " + std::to_string(epoch) + ": "; }

TrainResult run(const Objective& objective, const SparseGraph& g, const DenseMatrix& x, const TrainConfig& cfg,
                const CheckpointFn& on_checkpoint, Partition partition) {
  Rng init_rng = make_rng(cfg.seed, Stream::init);
  Rng aug_rng = make_rng(cfg.seed, Stream::augment);
  TrainResult res;
  res.partition = std::move(partition);
  res.params = init_params(cfg.resolved_arch(), x.cols(), cfg.hidden, cfg.embed_dim, init_rng, cfg.activations);
  AdamState adam;

  auto checkpoint = [&](int epoch) {
    res.history.checkpoint_epochs.push_back(epoch);
    if (cfg.track_full_loss) {
      Rng eval_rng = make_rng(cfg.seed, Stream::eval);
      res.history.full_loss.push_back(eval_full_loss(g, x, res.params, cfg, eval_rng));
    }
    if (on_checkpoint) on_checkpoint(epoch, res.params);
  };

  checkpoint(0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    try {
      LossValueGrad lv = objective.evaluate(res.params, aug_rng);
      adam_step(res.params.weights, lv.grads, adam, cfg.lr, cfg.weight_decay);
      res.history.loss.push_back(lv.value);
    } catch (const DegenerateError& e) {
      throw DegenerateError(epoch_prefix(epoch) + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(epoch_prefix(epoch) + e.what());
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    res.history.epoch_seconds.push_back(dt.count());
    if (epoch % cfg.checkpoint_every == 0 || epoch == cfg.epochs) checkpoint(epoch);
  }
  return res;
}

}  // namespace

TrainResult train(const SparseGraph& g, const DenseMatrix& x, const TrainConfig& cfg, const CheckpointFn& on_checkpoint,
                  const std::optional<Partition>& partition) {
  cfg.validate();
  Partition p;
  if (partition) {
    p = *partition;
  } else {
    const Index k = resolve_clusters(g.num_nodes(), cfg);
    p = multilevel_partition(g, k, {.balance_eps = cfg.balance_eps, .seed = cfg.seed}).partition;
  }
  Objective objective(g, x, cfg, p);
  return run(objective, g, x, cfg, on_checkpoint, std::move(p));
}

TrainResult full_graph_train(const SparseGraph& g, const DenseMatrix& x, const TrainConfig& cfg,
                             const CheckpointFn& on_checkpoint) {
  Objective objective(g, x, cfg, std::nullopt);
  return run(objective, g, x, cfg, on_checkpoint, Partition::identity(g.num_nodes()));
}

DenseMatrix infer(const SparseGraph& g, const DenseMatrix& x, const EncoderParams& params) {
  return gcn_forward(normalized_adjacency(g), x, params);
}

double eval_full_loss(const SparseGraph& g, const DenseMatrix& x, const EncoderParams& params, const TrainConfig& cfg,
                      Rng& rng) {
  // The negative graph comes from the run's seed, so it matches full_graph_train.
  Objective objective(g, x, cfg, std::nullopt);
  return objective.evaluate(params, rng).value;
}

std::vector<SweepRow> sweep_compression(const SparseGraph& g, const DenseMatrix& x, const std::vector<int>& labels,
                                        const Split& split, const TrainConfig& cfg, const std::vector<double>& rates) {
  std::vector<SweepRow> rows;
  for (double rate : rates) {
    if (!(rate > 0.0 && rate <= 1.0)) throw ValidationError("sweep: rates must lie in (0, 1]");
    TrainConfig c = cfg;
    c.n_clusters = 0;
    c.compression_rate = rate;
    const Index k = resolve_clusters(g.num_nodes(), c);
    TrainResult res = k == g.num_nodes() ? train(g, x, c, {}, Partition::identity(g.num_nodes())) : train(g, x, c);
    const DenseMatrix z = infer(g, x, res.params);
    const double acc = linear_probe(z, labels, split, {.seed = cfg.seed}).accuracy;
    rows.push_back({rate, k, acc, cfg.seed});
  }
  return rows;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("spearman: need two series of equal length >= 2");
  const std::vector<double> ra = ranks(a);
  const std::vector<double> rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace structcomp
