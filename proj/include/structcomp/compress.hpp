#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "structcomp/dense_matrix.hpp"
#include "structcomp/partition.hpp"
#include "structcomp/sparse_graph.hpp"

namespace structcomp {

/// Cluster-level features X_c (n′ × d) together with the fingerprint of the
/// partition that produced them.
struct CompressedFeatures {
  DenseMatrix matrix;
  std::uint64_t partition_id = 0;
};

/// Cluster graph A_c = P†ᵀ A P† in count form. Off-diagonal weights sum the
/// edges between two clusters; self_weights[c] sums A_ij over i, j ∈ S_c
/// (each internal undirected edge therefore counts twice).
struct CompressedGraph {
  SparseGraph graph;
  std::vector<double> self_weights;
};

enum class CompressMode {
  mean,  ///< X_c = Pᵀ X
  sum,   ///< X_c = P†ᵀ X
};

CompressedFeatures compress_features(const DenseMatrix& x, const Partition& p, CompressMode mode = CompressMode::mean);

struct CompressGraphOptions {
  bool keep_self_loops = false;  ///< store self_weights on the diagonal
  bool binarize = false;         ///< replace every positive weight by 1
};

CompressedGraph compress_graph(const SparseGraph& g, const Partition& p, const CompressGraphOptions& opts = {});

/// DropMember: each member is kept independently with probability 1 − drop_rate
/// and every cluster row becomes the mean of its kept members. A cluster whose
/// members were all dropped falls back to its full mean. drop_rate = 0 draws no
/// random numbers and is bit-identical to compress_features(mean).
CompressedFeatures drop_member(const DenseMatrix& x, const Partition& p, double drop_rate, Rng& rng);
/// DropMember with an explicit keep mask (mask[i] != 0 keeps node i).
CompressedFeatures drop_member_with_mask(const DenseMatrix& x, const Partition& p, std::span<const std::uint8_t> mask);

/// P† Z_c: every node receives its cluster's row.
DenseMatrix lift(const DenseMatrix& z_c, const Partition& p);

/// Zeroes whole feature columns, each independently with probability mask_rate.
/// mask_rate = 0 draws no random numbers.
CompressedFeatures mask_features(const CompressedFeatures& x_c, double mask_rate, Rng& rng);

}  // namespace structcomp
