#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "structcomp/dense_matrix.hpp"
#include "structcomp/sparse_graph.hpp"

namespace structcomp {

using ClusterId = std::int32_t;

/// Node-to-cluster assignment. Implicitly defines the binary partition matrix
/// P† (P†_ic = 1 iff assign[i] = c) and its column-normalized form P.
class Partition {
 public:
  Partition() = default;
  /// Validates ids in [0, n_clusters) and that no cluster is empty.
  Partition(std::vector<ClusterId> assign, ClusterId n_clusters);

  static Partition identity(Index n);
  static Partition single(Index n);

  Index num_nodes() const { return static_cast<Index>(assign_.size()); }
  ClusterId num_clusters() const { return n_clusters_; }
  ClusterId cluster_of(Index i) const { return assign_[static_cast<std::size_t>(i)]; }
  const std::vector<ClusterId>& assign() const { return assign_; }
  const std::vector<Index>& sizes() const { return sizes_; }
  Index size_of(ClusterId c) const { return sizes_[static_cast<std::size_t>(c)]; }
  /// Nodes of every cluster, each list in ascending node order.
  std::vector<std::vector<NodeId>> members() const;

  /// 64-bit FNV-1a digest of the assignment; identifies the partition that
  /// produced a set of compressed features.
  std::uint64_t fingerprint() const;

  /// Dense P† (n × n′, binary) and P (n × n′, column c scaled by 1/|S_c|).
  DenseMatrix binary_matrix() const;
  DenseMatrix normalized_matrix() const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.n_clusters_ == b.n_clusters_ && a.assign_ == b.assign_;
  }

 private:
  std::vector<ClusterId> assign_;
  ClusterId n_clusters_ = 0;
  std::vector<Index> sizes_;
};

struct PartitionOptions {
  double balance_eps = 0.1;
  std::uint64_t seed = 0;
  int refine_passes = 4;
};

/// Cut of the current assignment before and after one refinement pass.
struct RefinementPass {
  int level = 0;
  Index cut_before = 0;
  Index cut_after = 0;
  bool balanced_after = true;
};

struct PartitionResult {
  Partition partition;
  /// Balance tolerance actually enforced; differs from the request when the
  /// request was infeasible.
  double effective_eps = 0.0;
  bool balance_relaxed = false;
  int levels = 0;
  std::vector<RefinementPass> passes;
};

/// Balanced min-cut partition into n_clusters parts by multilevel
/// heavy-edge-matching coarsening, farthest-first seeded region growing and
/// boundary refinement with single-node positive-gain moves.
PartitionResult multilevel_partition(const SparseGraph& g, Index n_clusters, const PartitionOptions& opts = {});

/// Number of undirected edges whose endpoints lie in different clusters.
Index edge_cut(const SparseGraph& g, const Partition& p);

/// max_c |S_c| / (n / n′).
double imbalance(const Partition& p);

/// Largest cluster size allowed at tolerance eps: floor((1 + eps) · ceil(n / n′)).
Index max_cluster_size(Index n, Index n_clusters, double eps);

enum class Propagation {
  adjacency,   ///< A^k
  normalized,  ///< Â^k
};

enum class RemainderForm {
  binary,      ///< P† P†ᵀ  (entries 1 within a cluster)
  normalized,  ///< P† Pᵀ   (entries 1/|S_c| within a cluster)
};

struct RemainderOptions {
  int k = 1;
  Propagation propagation = Propagation::adjacency;
  RemainderForm form = RemainderForm::binary;
  bool force = false;  ///< lifts the k ≤ 3 densification guard
};

/// ‖M^k − B‖_F where M is A or Â and B is P†P†ᵀ or P†Pᵀ, evaluated from the
/// sparse entries of M^k and the cluster sizes without forming n × n matrices.
double partition_remainder_norm(const SparseGraph& g, const Partition& p, const RemainderOptions& opts = {});

/// Equal-size clusters; contiguous blocks, or a seeded shuffle of them.
Partition even_partition(Index n, Index n_clusters, std::optional<std::uint64_t> seed = std::nullopt);

/// Uniformly random assignment with every cluster non-empty.
Partition random_partition(Index n, Index n_clusters, Rng& rng);

}  // namespace structcomp
