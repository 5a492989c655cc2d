#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "structcomp/dense_matrix.hpp"
#include "structcomp/sparse_graph.hpp"

namespace structcomp {

/// A loss value and its gradient with respect to each embedding input, in
/// argument order.
struct LossValueGrad {
  double value = 0.0;
  std::vector<DenseMatrix> grads;
};

struct NegativeSampleSpec {
  int num_permutations = 1;  ///< random permutation graphs unioned into L^neg
  int negatives_per_anchor = 5;  ///< K in the single-view logistic loss
};

using NodePair = std::pair<NodeId, NodeId>;

/// Union of `num_permutations` random n-cycles (each a derangement, drawn
/// with Sattolo's algorithm), symmetrized, without self-pairs.
SparseGraph negative_graph(Index n_nodes, const NegativeSampleSpec& spec, Rng& rng);

/// Tr(Zᵀ L Z) and, optionally, its gradient 2 L Z (L symmetric).
double laplacian_quadratic(const SparseGraph& laplacian, const DenseMatrix& z, DenseMatrix* grad = nullptr);

/// SCE: α / Tr(Zᵀ L^neg Z). Throws DegenerateError unless the trace is positive.
LossValueGrad sce_loss(const DenseMatrix& z, const SparseGraph& l_neg, double alpha = 1.0);

/// COLES, in minimization form: Tr(Zᵀ L Z) − Tr(Zᵀ L^neg Z).
LossValueGrad coles_loss(const DenseMatrix& z, const SparseGraph& l_pos, const SparseGraph& l_neg);

/// Symmetric GRACE InfoNCE with cosine similarity and temperature τ,
/// averaged over the 2n anchors of both views. grads = {∂/∂z1, ∂/∂z2}.
LossValueGrad infonce_loss(const DenseMatrix& z1, const DenseMatrix& z2, double tau);

/// Single-view logistic loss −log σ(z_uᵀz_v) − Σ_k log σ(−z_uᵀz_k), summed over
/// all listed pairs and divided by the number of positive pairs (anchors).
LossValueGrad sage_single_view_loss(const DenseMatrix& z, std::span<const NodePair> pos_pairs,
                                    std::span<const NodePair> neg_pairs);

/// Positive pairs are the off-diagonal entries of `graph` (both directions);
/// each gets K negatives drawn uniformly among nodes not adjacent to the anchor.
struct SagePairs {
  std::vector<NodePair> pos;
  std::vector<NodePair> neg;
};
SagePairs sample_sage_pairs(const SparseGraph& graph, int negatives_per_anchor, Rng& rng);

/// CCA-SSG: ‖Z̃₁ − Z̃₂‖²_F + λ(‖Z̃₁ᵀZ̃₁ − I‖²_F + ‖Z̃₂ᵀZ̃₂ − I‖²_F), where Z̃ is
/// Z with columns centered, divided by their population standard deviation,
/// and scaled by 1/sqrt(n).
LossValueGrad cca_ssg_loss(const DenseMatrix& z1, const DenseMatrix& z2, double lambda);

/// Column standardization used by cca_ssg_loss (exposed for tests).
DenseMatrix standardize_columns(const DenseMatrix& z);

/// −(2/n) Σᵢ e1ᵢᵀe2ᵢ + (1/n²) Σᵢ Σⱼ (e1ᵢᵀe2ⱼ)².
double spectral_contrastive_loss(const DenseMatrix& e1, const DenseMatrix& e2);

/// Mean Euclidean distance ‖f_u − f_v‖ over the listed pairs; 0 for no pairs.
double positive_pair_distance_loss(const DenseMatrix& f, std::span<const NodePair> pairs);

}  // namespace structcomp
