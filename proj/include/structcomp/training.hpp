#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "structcomp/dense_matrix.hpp"
#include "structcomp/encoder.hpp"
#include "structcomp/losses.hpp"
#include "structcomp/partition.hpp"
#include "structcomp/sparse_graph.hpp"

namespace structcomp {

enum class Model { sce, coles, grace, cca_ssg };

std::string to_string(Model m);
Model model_from_string(const std::string& s);

/// Every hyperparameter of a run. The JSON config uses these field names.
struct TrainConfig {
  Model model = Model::grace;
  double lr = 1e-3;
  int epochs = 50;
  double weight_decay = 0.0;
  Index n_clusters = 0;            // 0: derive from compression_rate
  double compression_rate = 0.1;
  double tau = 0.5;
  double lambda = 1e-3;
  double alpha = 1.0;
  double drop_rate = 0.2;          // DropMember for StructComp, DropEdge for full-graph runs
  int K = 5;
  int num_permutations = 1;
  Index hidden = 256;
  Index embed_dim = 128;
  std::optional<Arch> arch;        // default: linear for sce/coles, mlp2 otherwise
  std::array<Activation, 2> activations{Activation::relu, Activation::relu};
  bool weighted_laplacian = false;
  double balance_eps = 0.1;
  std::uint64_t seed = 0;
  int checkpoint_every = 1;
  bool track_full_loss = false;    // evaluate the full-graph loss at each checkpoint

  Arch resolved_arch() const;
  bool multi_view() const { return model == Model::grace || model == Model::cca_ssg; }
  void validate() const;
};

/// n_clusters if set, else max(2, round(rate * n)), clamped to n.
Index resolve_clusters(Index n, const TrainConfig& cfg);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<DenseMatrix> m;
  std::vector<DenseMatrix> v;
};

/// One Adam update with L2 weight decay added to the gradient. Throws
/// NumericalError on a non-finite gradient, leaving params and state untouched.
void adam_step(std::vector<DenseMatrix>& params, const std::vector<DenseMatrix>& grads, AdamState& state, double lr,
               double weight_decay);

struct TrainHistory {
  std::vector<double> loss;               // one per epoch, evaluated before that epoch's update
  std::vector<int> checkpoint_epochs;     // epoch index 0 = initial parameters
  std::vector<double> full_loss;          // filled when track_full_loss is set
  std::vector<double> epoch_seconds;
};

using CheckpointFn = std::function<void(int epoch, const EncoderParams& params)>;

struct TrainResult {
  EncoderParams params;
  TrainHistory history;
  Partition partition;  // the partition used (identity for full-graph runs)
};

/// StructComp training: partition and compress once, then train an MLP (or
/// linear map) on the compressed nodes. Pass `partition` to skip partitioning.
TrainResult train(const SparseGraph& g, const DenseMatrix& x, const TrainConfig& cfg,
                  const CheckpointFn& on_checkpoint = {}, const std::optional<Partition>& partition = std::nullopt);

/// Baseline: the same loss and optimizer with the GCN inside the loop.
TrainResult full_graph_train(const SparseGraph& g, const DenseMatrix& x, const TrainConfig& cfg,
                             const CheckpointFn& on_checkpoint = {});

/// Full-graph embeddings with the trained parameters.
DenseMatrix infer(const SparseGraph& g, const DenseMatrix& x, const EncoderParams& params);

/// Loss of the original model on the full graph at `params`. Negative graphs
/// and augmented views are drawn from `rng`.
double eval_full_loss(const SparseGraph& g, const DenseMatrix& x, const EncoderParams& params, const TrainConfig& cfg,
                      Rng& rng);

/// Every undirected edge independently removed with probability `rate`.
SparseGraph drop_edges(const SparseGraph& g, double rate, Rng& rng);

/// Loss and gradients of one training objective, exposed for gradient checks.
/// Compressed when `partition` is given, otherwise full-graph.
class Objective {
 public:
  Objective(const SparseGraph& g, const DenseMatrix& x, const TrainConfig& cfg, std::optional<Partition> partition);
  ~Objective();
  Objective(Objective&&) noexcept;
  Objective& operator=(Objective&&) noexcept;

  /// Loss value and gradients with respect to params.weights; `rng` feeds view
  /// augmentation (unused by single-view models).
  LossValueGrad evaluate(const EncoderParams& params, Rng& rng) const;
  Index num_rows() const;
  Index input_dim() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SweepRow {
  double rate = 0.0;
  Index n_clusters = 0;
  double accuracy = 0.0;
  std::uint64_t seed = 0;
};

struct Split;

/// Trains at n′ = rate·n for each rate and reports linear-probe accuracy.
std::vector<SweepRow> sweep_compression(const SparseGraph& g, const DenseMatrix& x, const std::vector<int>& labels,
                                        const Split& split, const TrainConfig& cfg, const std::vector<double>& rates);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace structcomp
