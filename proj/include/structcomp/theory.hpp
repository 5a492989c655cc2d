#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "structcomp/dense_matrix.hpp"
#include "structcomp/partition.hpp"
#include "structcomp/sparse_graph.hpp"

namespace structcomp {

struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = false;
  Index n = 0;
  double p = 0.0;
  Index n_clusters = 0;
  std::uint64_t seed = 0;
  // Ingredients of the two sides.
  double loss_graph = 0.0;
  double loss_compressed = 0.0;
  double remainder_norm = 0.0;
  double feature_bound = 0.0;  // S_X, or ‖X‖₂ for the Lipschitz form
  double weight_norm = 0.0;
};

/// Single-view distance losses on the graph (f_G = AXW, mean over edges) and on
/// the clusters (f_P = P†ᵀXW, mean over cluster pairs joined by an edge), and
/// the bound ‖A − P†P†ᵀ‖_F · max_i‖X_i‖ · ‖W‖₂. Self-loops in `g` are part of A
/// but are not positive pairs.
BoundReport theorem1_bound(const SparseGraph& g, const Partition& p, const DenseMatrix& x, const DenseMatrix& w);

/// G(n, p) with a shuffled even partition, X and W uniform in [−1, 1].
/// Edgeless draws are retried up to 10 times.
BoundReport check_theorem1(Index n, double p, Index n_clusters, Index d, Index d_out, std::uint64_t seed);

struct ScalarPairs {
  std::vector<double> h;
  std::vector<std::vector<NodeId>> pos;
  std::vector<std::vector<NodeId>> neg;
};

/// The fixed 8-node scalar instance used by the tests and the CLI.
ScalarPairs standard_scalar_set();

struct Theorem2Report {
  double sigma = 0.0;
  std::int64_t mc_samples = 0;
  double loss_clean = 0.0;      // no-augmentation loss
  double sum_phi = 0.0;         // Σᵢ Σ_{j∈neg(i)} φ(hᵢ, hⱼ)
  double regularizer = 0.0;     // sum_phi · σ²
  double mc_estimate = 0.0;
  double mc_stderr = 0.0;
  double analytic_value = 0.0;  // loss_clean + sum_phi·σ² (second-order expansion)
  double printed_value = 0.0;   // loss_clean + ½·sum_phi·σ²
  double difference = 0.0;      // |mc_estimate − analytic_value|
  double sigma_cubed = 0.0;
};

/// Σ_pos hᵢhⱼ + Σ_neg log(e^{hᵢhᵢ} + e^{hᵢhⱼ}) with anchors hᵢ replaced by `anchors`.
double scalar_infonce(const ScalarPairs& s, std::span<const double> anchors);
double theorem2_phi(double hi, double hj);

/// Monte Carlo mean of the noisy loss (h̃ᵢ = hᵢ + N(0, σ²)) against its
/// second-order expansion. Draws are antithetic and rescaled to unit second
/// moment, which removes the odd-order and the σ² sampling noise.
Theorem2Report check_theorem2(const ScalarPairs& s, double sigma, std::int64_t mc_samples, std::uint64_t seed);

/// Max |σ(P†Pᵀσ(P†PᵀXW₁)W₂) − P†σ(σ(PᵀXW₁)W₂)| with ReLU and a random partition.
double check_appendix_c(Index n, Index n_clusters, Index d, Index h, Index d_out, std::uint64_t seed);

struct SpectralReport {
  double compressed = 0.0;  // on the n′ cluster embeddings
  double lifted = 0.0;      // on the n lifted node embeddings
  double deviation = 0.0;
};

/// Spectral loss on (PᵀXW_a, PᵀXW_b) and on their lifts P†(·). Any partition.
SpectralReport spectral_equality(const Partition& p, const DenseMatrix& x, const DenseMatrix& wa, const DenseMatrix& wb);

/// Random even partition and random X, W_a, W_b. Rejects n_clusters ∤ n.
SpectralReport check_appendix_d_spectral(Index n, Index n_clusters, Index d, std::uint64_t seed);

/// |𝓛(P†PᵀXW) − 𝓛(Â^kXW)| ≤ L·‖P†Pᵀ − Â^k‖₂·‖X‖₂·‖W‖₂ for an L-Lipschitz loss
/// (Lipschitz with respect to the spectral norm of its argument).
BoundReport check_appendix_d_lipschitz(const SparseGraph& g, const Partition& p, const DenseMatrix& x,
                                       const DenseMatrix& w, int k,
                                       const std::function<double(const DenseMatrix&)>& loss, double lipschitz_l,
                                       bool force = false);

}  // namespace structcomp
