#include "structcomp/sparse_graph.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

#include "structcomp/error.hpp"

namespace structcomp {

namespace {

std::atomic<std::int64_t> g_spmm_calls{0};
std::atomic<Index> g_spmm_max_rows{0};

struct Entry {
  NodeId row;
  NodeId col;
  double w;
};

SparseGraph from_sorted_entries(Index n, std::vector<Entry>& entries, DuplicatePolicy dup) {
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> offsets(static_cast<std::size_t>(n + 1), 0);
  std::vector<NodeId> indices;
  std::vector<double> weights;
  indices.reserve(entries.size());
  weights.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
      if (dup == DuplicatePolicy::sum) weights.back() += e.w;
      continue;
    }
    indices.push_back(e.col);
    weights.push_back(e.w);
    ++offsets[static_cast<std::size_t>(e.row) + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseGraph(n, std::move(offsets), std::move(indices), std::move(weights));
}

}  // namespace

SparseGraph::SparseGraph(Index n) : n_(n), offsets_(static_cast<std::size_t>(n + 1), 0) {
  if (n < 0) throw ValidationError("SparseGraph: negative node count");
}

SparseGraph::SparseGraph(Index n, std::vector<Index> offsets, std::vector<NodeId> indices,
                         std::vector<double> weights)
    : n_(n), offsets_(std::move(offsets)), indices_(std::move(indices)), weights_(std::move(weights)) {
  validate();
}

void SparseGraph::validate() const {
  if (n_ < 0) throw ValidationError("SparseGraph: negative node count");
  if (static_cast<Index>(offsets_.size()) != n_ + 1) throw ValidationError("SparseGraph: offsets length must be n+1");
  if (offsets_.front() != 0) throw ValidationError("SparseGraph: offsets[0] must be 0");
  if (offsets_.back() != static_cast<Index>(indices_.size())) {
    throw ValidationError("SparseGraph: offsets[n] must equal the number of stored entries");
  }
  if (weights_.size() != indices_.size()) throw ValidationError("SparseGraph: weights/indices length mismatch");
  for (Index i = 0; i < n_; ++i) {
    if (offsets_[i + 1] < offsets_[i]) throw ValidationError("SparseGraph: offsets must be non-decreasing");
    auto nb = neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] < 0 || nb[k] >= n_) throw ValidationError("SparseGraph: column index out of range");
      if (k > 0 && nb[k] <= nb[k - 1]) {
        throw ValidationError("SparseGraph: column indices must be strictly increasing within a row");
      }
    }
  }
  for (Index i = 0; i < n_; ++i) {
    auto nb = neighbors(i);
    auto wt = weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (!std::isfinite(wt[k])) throw ValidationError("SparseGraph: non-finite weight");
      const Index j = nb[k];
      if (j == i) continue;
      auto other = neighbors(j);
      auto it = std::lower_bound(other.begin(), other.end(), static_cast<NodeId>(i));
      if (it == other.end() || *it != i || weights(j)[static_cast<std::size_t>(it - other.begin())] != wt[k]) {
        std::ostringstream os;
        os << "SparseGraph: entry (" << i << ", " << j << ") has no symmetric partner with equal weight";
        throw ValidationError(os.str());
      }
    }
  }
}

Index SparseGraph::num_self_loops() const {
  Index loops = 0;
  for (Index i = 0; i < n_; ++i)
    for (NodeId j : neighbors(i))
      if (j == i) ++loops;
  return loops;
}

Index SparseGraph::num_edges() const {
  const Index loops = num_self_loops();
  return (num_entries() - loops) / 2 + loops;
}

double SparseGraph::weighted_degree(Index i) const {
  double d = 0.0;
  for (double w : weights(i)) d += w;
  return d;
}

double SparseGraph::weight(Index i, Index j) const {
  auto nb = neighbors(i);
  auto it = std::lower_bound(nb.begin(), nb.end(), static_cast<NodeId>(j));
  if (it == nb.end() || *it != j) return 0.0;
  return weights(i)[static_cast<std::size_t>(it - nb.begin())];
}

bool SparseGraph::has_edge(Index i, Index j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), static_cast<NodeId>(j));
}

std::vector<std::pair<NodeId, NodeId>> SparseGraph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (Index i = 0; i < n_; ++i)
    for (NodeId j : neighbors(i))
      if (j >= i) out.emplace_back(static_cast<NodeId>(i), j);
  return out;
}

DenseMatrix SparseGraph::to_dense() const {
  DenseMatrix m(n_, n_);
  for (Index i = 0; i < n_; ++i) {
    auto nb = neighbors(i);
    auto wt = weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) m(i, nb[k]) = wt[k];
  }
  return m;
}

SparseGraph build_weighted_graph(std::span<const WeightedEdge> edges, Index n, DedupPolicy policy) {
  if (n < 0) throw ValidationError("build_graph: negative node count");
  std::vector<Entry> entries;
  entries.reserve(edges.size() * 2);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
      std::ostringstream os;
      os << "build_graph: edge " << k << " (" << e.u << ", " << e.v << ") out of range for n=" << n;
      throw ValidationError(os.str());
    }
    if (!std::isfinite(e.w)) {
      std::ostringstream os;
      os << "build_graph: edge " << k << " (" << e.u << ", " << e.v << ") has a non-finite weight";
      throw ValidationError(os.str());
    }
    if (e.u == e.v) {
      if (policy.keep_self_loops) entries.push_back({e.u, e.u, e.w});
      continue;
    }
    entries.push_back({e.u, e.v, e.w});
    entries.push_back({e.v, e.u, e.w});
  }
  return from_sorted_entries(n, entries, policy.duplicates);
}

SparseGraph build_graph(std::span<const std::pair<NodeId, NodeId>> edges, Index n, DedupPolicy policy) {
  std::vector<WeightedEdge> weighted;
  weighted.reserve(edges.size());
  for (const auto& [u, v] : edges) weighted.push_back({u, v, 1.0});
  return build_weighted_graph(weighted, n, policy);
}

SparseGraph normalized_adjacency(const SparseGraph& g) {
  const Index n = g.num_nodes();
  std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (g.has_edge(i, i)) {
      throw ValidationError("normalized_adjacency: input graph must not contain self-loops (node " +
                            std::to_string(i) + ")");
    }
    inv_sqrt_deg[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(g.weighted_degree(i) + 1.0);
  }
  std::vector<Index> offsets(static_cast<std::size_t>(n + 1), 0);
  std::vector<NodeId> indices;
  std::vector<double> weights;
  indices.reserve(static_cast<std::size_t>(g.num_entries() + n));
  weights.reserve(indices.capacity());
  for (Index i = 0; i < n; ++i) {
    auto nb = g.neighbors(i);
    auto wt = g.weights(i);
    const double si = inv_sqrt_deg[static_cast<std::size_t>(i)];
    bool diag_done = false;
    for (std::size_t k = 0; k <= nb.size(); ++k) {
      if (!diag_done && (k == nb.size() || nb[k] > i)) {
        indices.push_back(static_cast<NodeId>(i));
        weights.push_back(si * si);
        diag_done = true;
      }
      if (k == nb.size()) break;
      indices.push_back(nb[k]);
      weights.push_back(wt[k] * (si * inv_sqrt_deg[static_cast<std::size_t>(nb[k])]));
    }
    offsets[static_cast<std::size_t>(i) + 1] = static_cast<Index>(indices.size());
  }
  return SparseGraph(n, std::move(offsets), std::move(indices), std::move(weights));
}

SparseGraph laplacian(const SparseGraph& g, LaplacianKind kind) {
  const SparseGraph base = kind == LaplacianKind::sym_normalized ? normalized_adjacency(g) : g;
  const Index n = base.num_nodes();
  std::vector<Index> offsets(static_cast<std::size_t>(n + 1), 0);
  std::vector<NodeId> indices;
  std::vector<double> weights;
  for (Index i = 0; i < n; ++i) {
    auto nb = base.neighbors(i);
    auto wt = base.weights(i);
    const double diag = kind == LaplacianKind::combinatorial ? g.weighted_degree(i) : 1.0;
    bool diag_done = false;
    for (std::size_t k = 0; k <= nb.size(); ++k) {
      if (!diag_done && (k == nb.size() || nb[k] >= i)) {
        const bool stored = k < nb.size() && nb[k] == i;
        indices.push_back(static_cast<NodeId>(i));
        weights.push_back(diag - (stored ? wt[k] : 0.0));
        diag_done = true;
        if (stored) continue;
      }
      if (k == nb.size()) break;
      indices.push_back(nb[k]);
      weights.push_back(-wt[k]);
    }
    offsets[static_cast<std::size_t>(i) + 1] = static_cast<Index>(indices.size());
  }
  return SparseGraph(n, std::move(offsets), std::move(indices), std::move(weights));
}

DenseMatrix sparse_product(const SparseGraph& g, const DenseMatrix& x) {
  if (g.num_nodes() != x.rows()) {
    std::ostringstream os;
    os << "spmm: graph has " << g.num_nodes() << " nodes but matrix is " << shape_string(x);
    throw ValidationError(os.str());
  }
  DenseMatrix out(x.rows(), x.cols());
  const Index d = x.cols();
  for (Index i = 0; i < g.num_nodes(); ++i) {
    double* out_row = out.row(i).data();
    auto nb = g.neighbors(i);
    auto wt = g.weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const double w = wt[k];
      const double* x_row = x.row(nb[k]).data();
      for (Index j = 0; j < d; ++j) out_row[j] += w * x_row[j];
    }
  }
  return out;
}

DenseMatrix spmm(const SparseGraph& g, const DenseMatrix& x) {
  DenseMatrix out = sparse_product(g, x);
  g_spmm_calls.fetch_add(1, std::memory_order_relaxed);
  Index prev = g_spmm_max_rows.load(std::memory_order_relaxed);
  while (prev < x.rows() && !g_spmm_max_rows.compare_exchange_weak(prev, x.rows(), std::memory_order_relaxed)) {
  }
  return out;
}

DenseMatrix k_step_propagate(const SparseGraph& g, const DenseMatrix& x, int k) {
  if (k < 0) throw ValidationError("k_step_propagate: k must be non-negative");
  DenseMatrix out = x;
  for (int s = 0; s < k; ++s) out = spmm(g, out);
  return out;
}

SparseGraph sparse_multiply(const SparseGraph& a, const SparseGraph& b) {
  if (a.num_nodes() != b.num_nodes()) throw ValidationError("sparse_multiply: node counts differ");
  const Index n = a.num_nodes();
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> touched;
  std::vector<Entry> entries;
  for (Index i = 0; i < n; ++i) {
    touched.clear();
    auto anb = a.neighbors(i);
    auto awt = a.weights(i);
    for (std::size_t p = 0; p < anb.size(); ++p) {
      auto bnb = b.neighbors(anb[p]);
      auto bwt = b.weights(anb[p]);
      for (std::size_t q = 0; q < bnb.size(); ++q) {
        const auto j = static_cast<std::size_t>(bnb[q]);
        if (!seen[j]) {
          seen[j] = 1;
          touched.push_back(bnb[q]);
        }
        acc[j] += awt[p] * bwt[q];
      }
    }
    for (NodeId j : touched) {
      entries.push_back({static_cast<NodeId>(i), j, acc[static_cast<std::size_t>(j)]});
      acc[static_cast<std::size_t>(j)] = 0.0;
      seen[static_cast<std::size_t>(j)] = 0;
    }
  }
  // Products of symmetric factors are symmetric in exact arithmetic; average
  // mirrored entries so the stored matrix is symmetric bit-for-bit.
  std::sort(entries.begin(), entries.end(),
            [](const Entry& x, const Entry& y) { return x.row != y.row ? x.row < y.row : x.col < y.col; });
  auto find = [&](NodeId r, NodeId c) -> const Entry* {
    auto it = std::lower_bound(entries.begin(), entries.end(), Entry{r, c, 0.0}, [](const Entry& x, const Entry& y) {
      return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    return (it != entries.end() && it->row == r && it->col == c) ? &*it : nullptr;
  };
  std::vector<Entry> sym = entries;
  for (auto& e : sym) {
    if (e.row == e.col) continue;
    const Entry* mirror = find(e.col, e.row);
    const double other = mirror ? mirror->w : 0.0;
    e.w = e.row < e.col ? 0.5 * (e.w + other) : 0.5 * (other + e.w);
  }
  // Entries whose mirror was missing need their partner inserted.
  std::vector<Entry> extra;
  for (const auto& e : entries)
    if (e.row != e.col && !find(e.col, e.row)) extra.push_back({e.col, e.row, 0.5 * e.w});
  sym.insert(sym.end(), extra.begin(), extra.end());
  return from_sorted_entries(n, sym, DuplicatePolicy::sum);
}

SparseGraph sparse_power(const SparseGraph& a, int k) {
  if (k < 0) throw ValidationError("sparse_power: k must be non-negative");
  if (k == 0) {
    std::vector<Index> offsets(static_cast<std::size_t>(a.num_nodes() + 1));
    std::iota(offsets.begin(), offsets.end(), Index{0});
    std::vector<NodeId> indices(static_cast<std::size_t>(a.num_nodes()));
    std::iota(indices.begin(), indices.end(), NodeId{0});
    return SparseGraph(a.num_nodes(), std::move(offsets), std::move(indices),
                       std::vector<double>(static_cast<std::size_t>(a.num_nodes()), 1.0));
  }
  SparseGraph out = a;
  for (int s = 1; s < k; ++s) out = sparse_multiply(out, a);
  return out;
}

SpmmStats spmm_stats() {
  return {g_spmm_calls.load(std::memory_order_relaxed), g_spmm_max_rows.load(std::memory_order_relaxed)};
}

void reset_spmm_stats() {
  g_spmm_calls.store(0, std::memory_order_relaxed);
  g_spmm_max_rows.store(0, std::memory_order_relaxed);
}

}  // namespace structcomp
