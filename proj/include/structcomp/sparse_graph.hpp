#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "structcomp/dense_matrix.hpp"

namespace structcomp {

using NodeId = std::int32_t;

/// Undirected graph stored as a symmetric CSR matrix. Every undirected edge
/// {i, j} appears as both (i, j) and (j, i); a self-loop appears once on the
/// diagonal. Houses A, Ã = A + I, Â and the Laplacians.
///
/// Canonical form: offsets non-decreasing with offsets[0] = 0 and
/// offsets[n] = indices.size(); column indices strictly increasing within a
/// row; symmetric with equal weights.
class SparseGraph {
 public:
  SparseGraph() = default;
  /// Edgeless graph over n nodes.
  explicit SparseGraph(Index n);
  /// Adopts CSR arrays after checking the canonical-form invariants.
  SparseGraph(Index n, std::vector<Index> offsets, std::vector<NodeId> indices, std::vector<double> weights);

  Index num_nodes() const { return n_; }
  /// Stored entries (2m plus the number of self-loops).
  Index num_entries() const { return static_cast<Index>(indices_.size()); }
  /// Undirected edges, self-loops counted once.
  Index num_edges() const;
  Index num_self_loops() const;

  std::span<const NodeId> neighbors(Index i) const {
    return {indices_.data() + offsets_[i], static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }
  std::span<const double> weights(Index i) const {
    return {weights_.data() + offsets_[i], static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }
  Index degree(Index i) const { return offsets_[i + 1] - offsets_[i]; }
  double weighted_degree(Index i) const;
  /// Weight of entry (i, j), 0 when absent.
  double weight(Index i, Index j) const;
  bool has_edge(Index i, Index j) const;

  const std::vector<Index>& offsets() const { return offsets_; }
  const std::vector<NodeId>& indices() const { return indices_; }
  const std::vector<double>& weight_values() const { return weights_; }

  /// Undirected edge list (i <= j), each edge once, in row-major order.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;
  DenseMatrix to_dense() const;

  friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

 private:
  void validate() const;

  Index n_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<NodeId> indices_;
  std::vector<double> weights_;
};

enum class DuplicatePolicy {
  collapse,  ///< repeated edges merge into one entry keeping the first listed weight
  sum,       ///< repeated edges accumulate their weights
};

struct DedupPolicy {
  bool keep_self_loops = false;
  DuplicatePolicy duplicates = DuplicatePolicy::collapse;
};

struct WeightedEdge {
  NodeId u;
  NodeId v;
  double w;
};

/// Builds a canonical symmetric CSR from an undirected edge list.
/// Throws ValidationError naming the offending pair when an endpoint is out of range.
SparseGraph build_graph(std::span<const std::pair<NodeId, NodeId>> edges, Index n, DedupPolicy policy = {});
SparseGraph build_weighted_graph(std::span<const WeightedEdge> edges, Index n, DedupPolicy policy = {});

/// Â = D̃^{-1/2} (A + I) D̃^{-1/2}. Requires a graph without self-loops.
SparseGraph normalized_adjacency(const SparseGraph& g);

enum class LaplacianKind {
  combinatorial,   ///< L = D − A
  sym_normalized,  ///< L = I − Â
};

SparseGraph laplacian(const SparseGraph& g, LaplacianKind kind);

/// Exact sparse-times-dense product; each output row accumulates its
/// neighbors in stored (ascending column) order.
DenseMatrix spmm(const SparseGraph& g, const DenseMatrix& x);

/// The same product without touching the spmm counters. Loss terms such as
/// Tr(Zᵀ L Z) use it; it is not message passing.
DenseMatrix sparse_product(const SparseGraph& g, const DenseMatrix& x);
/// Applies spmm k times; k = 0 returns x.
DenseMatrix k_step_propagate(const SparseGraph& g, const DenseMatrix& x, int k);

/// Sparse-sparse product a·b. Both operands symmetric, so the result is too.
SparseGraph sparse_multiply(const SparseGraph& a, const SparseGraph& b);
/// a^k as a sparse matrix; k = 0 gives the identity.
SparseGraph sparse_power(const SparseGraph& a, int k);

/// Counters describing every spmm call since the last reset. Used to verify
/// that compressed training never propagates over the full graph.
struct SpmmStats {
  std::int64_t calls = 0;
  Index max_rows = 0;
};
SpmmStats spmm_stats();
void reset_spmm_stats();

}  // namespace structcomp
