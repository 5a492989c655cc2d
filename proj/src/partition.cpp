#include "structcomp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "structcomp/error.hpp"

namespace structcomp {

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::vector<ClusterId> assign, ClusterId n_clusters)
    : assign_(std::move(assign)), n_clusters_(n_clusters) {
  if (n_clusters < 1 && !assign_.empty()) throw ValidationError("Partition: need at least one cluster");
  sizes_.assign(static_cast<std::size_t>(std::max<ClusterId>(n_clusters, 0)), 0);
  for (std::size_t i = 0; i < assign_.size(); ++i) {
    const ClusterId c = assign_[i];
    if (c < 0 || c >= n_clusters) {
      std::ostringstream os;
      os << "Partition: node " << i << " has cluster id " << c << " outside [0, " << n_clusters << ")";
      throw ValidationError(os.str());
    }
    ++sizes_[static_cast<std::size_t>(c)];
  }
  for (std::size_t c = 0; c < sizes_.size(); ++c) {
    if (sizes_[c] == 0) throw ValidationError("Partition: cluster " + std::to_string(c) + " is empty");
  }
}

Partition Partition::identity(Index n) {
  std::vector<ClusterId> assign(static_cast<std::size_t>(n));
  std::iota(assign.begin(), assign.end(), ClusterId{0});
  return Partition(std::move(assign), static_cast<ClusterId>(n));
}

Partition Partition::single(Index n) {
  return Partition(std::vector<ClusterId>(static_cast<std::size_t>(n), 0), 1);
}

std::vector<std::vector<NodeId>> Partition::members() const {
  std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(n_clusters_));
  for (std::size_t c = 0; c < out.size(); ++c) out[c].reserve(static_cast<std::size_t>(sizes_[c]));
  for (std::size_t i = 0; i < assign_.size(); ++i) out[static_cast<std::size_t>(assign_[i])].push_back(static_cast<NodeId>(i));
  return out;
}

std::uint64_t Partition::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint32_t>(n_clusters_));
  for (ClusterId c : assign_) mix(static_cast<std::uint32_t>(c));
  return h;
}

DenseMatrix Partition::binary_matrix() const {
  DenseMatrix m(num_nodes(), n_clusters_);
  for (Index i = 0; i < num_nodes(); ++i) m(i, cluster_of(i)) = 1.0;
  return m;
}

DenseMatrix Partition::normalized_matrix() const {
  DenseMatrix m(num_nodes(), n_clusters_);
  for (Index i = 0; i < num_nodes(); ++i) m(i, cluster_of(i)) = 1.0 / static_cast<double>(size_of(cluster_of(i)));
  return m;
}

// ---------------------------------------------------------------------------
// Quality measures

Index edge_cut(const SparseGraph& g, const Partition& p) {
  if (g.num_nodes() != p.num_nodes()) throw ValidationError("edge_cut: partition does not match graph");
  Index cut = 0;
  for (Index i = 0; i < g.num_nodes(); ++i)
    for (NodeId j : g.neighbors(i))
      if (j > i && p.cluster_of(i) != p.cluster_of(j)) ++cut;
  return cut;
}

double imbalance(const Partition& p) {
  const auto& s = p.sizes();
  if (s.empty()) return 1.0;
  const double largest = static_cast<double>(*std::max_element(s.begin(), s.end()));
  return largest / (static_cast<double>(p.num_nodes()) / static_cast<double>(p.num_clusters()));
}

Index max_cluster_size(Index n, Index n_clusters, double eps) {
  const Index even = (n + n_clusters - 1) / n_clusters;
  const auto allowed = static_cast<Index>(std::floor((1.0 + eps) * static_cast<double>(even) + 1e-9));
  return std::max(allowed, even);
}

double partition_remainder_norm(const SparseGraph& g, const Partition& p, const RemainderOptions& opts) {
  if (g.num_nodes() != p.num_nodes()) throw ValidationError("partition_remainder_norm: partition does not match graph");
  if (opts.k < 0) throw ValidationError("partition_remainder_norm: k must be non-negative");
  if (opts.k > 3 && !opts.force) {
    throw ValidationError("partition_remainder_norm: k=" + std::to_string(opts.k) +
                          " exceeds the densification guard (k <= 3); set force to override");
  }
  const SparseGraph base = opts.propagation == Propagation::normalized ? normalized_adjacency(g) : g;
  const SparseGraph m = sparse_power(base, opts.k);

  // ‖M − B‖² = ‖M‖² − 2⟨M, B⟩ + ‖B‖², with B constant on each cluster block.
  auto block_value = [&](ClusterId c) {
    return opts.form == RemainderForm::binary ? 1.0 : 1.0 / static_cast<double>(p.size_of(c));
  };
  double m_sq = 0.0;
  double cross = 0.0;
  for (Index i = 0; i < m.num_nodes(); ++i) {
    auto nb = m.neighbors(i);
    auto wt = m.weights(i);
    const ClusterId ci = p.cluster_of(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      m_sq += wt[k] * wt[k];
      if (p.cluster_of(nb[k]) == ci) cross += wt[k] * block_value(ci);
    }
  }
  double b_sq = 0.0;
  for (ClusterId c = 0; c < p.num_clusters(); ++c) {
    const double s = static_cast<double>(p.size_of(c));
    b_sq += s * s * block_value(c) * block_value(c);
  }
  return std::sqrt(std::max(0.0, m_sq - 2.0 * cross + b_sq));
}

Partition even_partition(Index n, Index n_clusters, std::optional<std::uint64_t> seed) {
  if (n_clusters < 1 || n_clusters > n) throw ValidationError("even_partition: need 1 <= n_clusters <= n");
  if (n % n_clusters != 0) {
    std::ostringstream os;
    os << "even_partition: " << n_clusters << " clusters do not divide " << n << " nodes";
    throw ValidationError(os.str());
  }
  const Index block = n / n_clusters;
  std::vector<ClusterId> assign(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) assign[static_cast<std::size_t>(i)] = static_cast<ClusterId>(i / block);
  if (seed) {
    Rng rng = make_rng(*seed, Stream::partition);
    std::shuffle(assign.begin(), assign.end(), rng);
  }
  return Partition(std::move(assign), static_cast<ClusterId>(n_clusters));
}

Partition random_partition(Index n, Index n_clusters, Rng& rng) {
  if (n_clusters < 1 || n_clusters > n) throw ValidationError("random_partition: need 1 <= n_clusters <= n");
  std::vector<ClusterId> assign(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    assign[static_cast<std::size_t>(i)] =
        i < n_clusters ? static_cast<ClusterId>(i) : static_cast<ClusterId>(rng() % static_cast<std::uint64_t>(n_clusters));
  }
  std::shuffle(assign.begin(), assign.end(), rng);
  return Partition(std::move(assign), static_cast<ClusterId>(n_clusters));
}

// ---------------------------------------------------------------------------
// Multilevel partitioner

namespace {

struct Level {
  SparseGraph graph;             // weighted, no self-loops
  std::vector<Index> node_weight;
  std::vector<NodeId> to_coarse;  // fine node -> node of the next coarser level
};

Index total_weight(const std::vector<Index>& w) { return std::accumulate(w.begin(), w.end(), Index{0}); }

// One round of heavy-edge matching. Nodes are visited in a seeded random
// order; among unmatched neighbors the heaviest edge wins and ties go to the
// lowest node index.
Level coarsen_once(const SparseGraph& g, const std::vector<Index>& node_weight, Index max_pair_weight, Rng& rng,
                   std::vector<NodeId>& to_coarse) {
  const Index n = g.num_nodes();
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<NodeId> mate(static_cast<std::size_t>(n), -1);
  for (NodeId u : order) {
    if (mate[static_cast<std::size_t>(u)] != -1) continue;
    NodeId best = -1;
    double best_w = -1.0;
    auto nb = g.neighbors(u);
    auto wt = g.weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const NodeId v = nb[k];
      if (mate[static_cast<std::size_t>(v)] != -1) continue;
      if (node_weight[static_cast<std::size_t>(u)] + node_weight[static_cast<std::size_t>(v)] > max_pair_weight) continue;
      if (wt[k] > best_w) {
        best_w = wt[k];
        best = v;
      }
    }
    if (best == -1) {
      mate[static_cast<std::size_t>(u)] = u;
    } else {
      mate[static_cast<std::size_t>(u)] = best;
      mate[static_cast<std::size_t>(best)] = u;
    }
  }

  to_coarse.assign(static_cast<std::size_t>(n), -1);
  NodeId next = 0;
  for (NodeId u = 0; u < n; ++u) {
    const NodeId m = mate[static_cast<std::size_t>(u)];
    if (m >= u) {
      to_coarse[static_cast<std::size_t>(u)] = next;
      to_coarse[static_cast<std::size_t>(m)] = next;
      ++next;
    }
  }

  Level coarse;
  coarse.node_weight.assign(static_cast<std::size_t>(next), 0);
  for (NodeId u = 0; u < n; ++u)
    coarse.node_weight[static_cast<std::size_t>(to_coarse[static_cast<std::size_t>(u)])] +=
        node_weight[static_cast<std::size_t>(u)];
  std::vector<WeightedEdge> edges;
  for (NodeId u = 0; u < n; ++u) {
    auto nb = g.neighbors(u);
    auto wt = g.weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] <= u) continue;
      edges.push_back({to_coarse[static_cast<std::size_t>(u)], to_coarse[static_cast<std::size_t>(nb[k])], wt[k]});
    }
  }
  coarse.graph = build_weighted_graph(edges, next, {.keep_self_loops = false, .duplicates = DuplicatePolicy::sum});
  return coarse;
}

// Hop distances from a set of sources (multi-source BFS); unreachable = max.
void bfs_relax(const SparseGraph& g, NodeId source, std::vector<Index>& dist) {
  std::queue<NodeId> q;
  dist[static_cast<std::size_t>(source)] = 0;
  q.push(source);
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : g.neighbors(u)) {
      if (dist[static_cast<std::size_t>(u)] + 1 < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        q.push(v);
      }
    }
  }
}

std::vector<ClusterId> initial_partition(const SparseGraph& g, const std::vector<Index>& node_weight, Index k,
                                         Index cap, Rng& rng) {
  const Index n = g.num_nodes();
  constexpr Index kUnreached = std::numeric_limits<Index>::max() / 4;

  // Farthest-first seeds: the first is drawn from the rng, each next seed
  // maximizes hop distance to the chosen ones (lowest index on ties).
  std::vector<NodeId> seeds;
  std::vector<Index> dist(static_cast<std::size_t>(n), kUnreached);
  std::vector<char> is_seed(static_cast<std::size_t>(n), 0);
  NodeId first = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(n));
  seeds.push_back(first);
  is_seed[static_cast<std::size_t>(first)] = 1;
  bfs_relax(g, first, dist);
  while (static_cast<Index>(seeds.size()) < k) {
    NodeId best = -1;
    for (NodeId v = 0; v < n; ++v) {
      if (is_seed[static_cast<std::size_t>(v)]) continue;
      if (best == -1 || dist[static_cast<std::size_t>(v)] > dist[static_cast<std::size_t>(best)]) best = v;
    }
    seeds.push_back(best);
    is_seed[static_cast<std::size_t>(best)] = 1;
    bfs_relax(g, best, dist);
  }

  std::vector<ClusterId> assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> weight(static_cast<std::size_t>(k), 0);
  // Frontier of each cluster ordered by connection strength, then node index.
  std::vector<std::map<NodeId, double>> conn(static_cast<std::size_t>(k));
  std::vector<std::set<std::pair<double, NodeId>>> frontier(static_cast<std::size_t>(k));

  auto absorb = [&](ClusterId c, NodeId v) {
    assign[static_cast<std::size_t>(v)] = c;
    weight[static_cast<std::size_t>(c)] += node_weight[static_cast<std::size_t>(v)];
    auto nb = g.neighbors(v);
    auto wt = g.weights(v);
    auto& cc = conn[static_cast<std::size_t>(c)];
    auto& fr = frontier[static_cast<std::size_t>(c)];
    for (std::size_t e = 0; e < nb.size(); ++e) {
      const NodeId u = nb[e];
      if (assign[static_cast<std::size_t>(u)] != -1) continue;
      auto it = cc.find(u);
      double old = 0.0;
      if (it != cc.end()) {
        old = it->second;
        fr.erase({-old, u});
      }
      cc[u] = old + wt[e];
      fr.insert({-(old + wt[e]), u});
    }
  };

  for (ClusterId c = 0; c < k; ++c) absorb(c, seeds[static_cast<std::size_t>(c)]);

  const double target = static_cast<double>(total_weight(node_weight)) / static_cast<double>(k);
  bool grew = true;
  while (grew) {
    grew = false;
    for (ClusterId c = 0; c < k; ++c) {
      if (static_cast<double>(weight[static_cast<std::size_t>(c)]) >= target) continue;
      auto& fr = frontier[static_cast<std::size_t>(c)];
      while (!fr.empty()) {
        const NodeId v = fr.begin()->second;
        fr.erase(fr.begin());
        if (assign[static_cast<std::size_t>(v)] != -1) continue;
        if (weight[static_cast<std::size_t>(c)] + node_weight[static_cast<std::size_t>(v)] > cap) continue;
        absorb(c, v);
        grew = true;
        break;
      }
    }
  }

  // Nodes the regions could not reach (other components, or blocked by the
  // cap) go to the best-connected cluster with room, else the lightest one.
  for (NodeId v = 0; v < n; ++v) {
    if (assign[static_cast<std::size_t>(v)] != -1) continue;
    std::map<ClusterId, double> link;
    auto nb = g.neighbors(v);
    auto wt = g.weights(v);
    for (std::size_t e = 0; e < nb.size(); ++e)
      if (assign[static_cast<std::size_t>(nb[e])] != -1) link[assign[static_cast<std::size_t>(nb[e])]] += wt[e];
    ClusterId best = -1;
    double best_link = -1.0;
    for (const auto& [c, w] : link) {
      if (weight[static_cast<std::size_t>(c)] + node_weight[static_cast<std::size_t>(v)] > cap) continue;
      if (w > best_link) {
        best_link = w;
        best = c;
      }
    }
    if (best == -1) {
      best = 0;
      for (ClusterId c = 1; c < k; ++c)
        if (weight[static_cast<std::size_t>(c)] < weight[static_cast<std::size_t>(best)]) best = c;
    }
    assign[static_cast<std::size_t>(v)] = best;
    weight[static_cast<std::size_t>(best)] += node_weight[static_cast<std::size_t>(v)];
  }
  return assign;
}

struct RefineState {
  const SparseGraph& g;
  const std::vector<Index>& node_weight;
  std::vector<ClusterId>& assign;
  std::vector<Index> weight;
  std::vector<Index> count;  // nodes of this level per cluster
  std::vector<double> conn;  // scratch, indexed by cluster
  std::vector<ClusterId> touched;

  RefineState(const SparseGraph& graph, const std::vector<Index>& nw, std::vector<ClusterId>& a, Index k)
      : g(graph), node_weight(nw), assign(a), weight(static_cast<std::size_t>(k), 0),
        count(static_cast<std::size_t>(k), 0), conn(static_cast<std::size_t>(k), 0.0) {
    for (std::size_t v = 0; v < assign.size(); ++v) {
      weight[static_cast<std::size_t>(assign[v])] += node_weight[v];
      ++count[static_cast<std::size_t>(assign[v])];
    }
  }

  void gather(NodeId v) {
    for (ClusterId c : touched) conn[static_cast<std::size_t>(c)] = 0.0;
    touched.clear();
    auto nb = g.neighbors(v);
    auto wt = g.weights(v);
    for (std::size_t e = 0; e < nb.size(); ++e) {
      const ClusterId c = assign[static_cast<std::size_t>(nb[e])];
      if (conn[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
      conn[static_cast<std::size_t>(c)] += wt[e];
    }
    std::sort(touched.begin(), touched.end());
  }

  void move(NodeId v, ClusterId to) {
    const ClusterId from = assign[static_cast<std::size_t>(v)];
    weight[static_cast<std::size_t>(from)] -= node_weight[static_cast<std::size_t>(v)];
    --count[static_cast<std::size_t>(from)];
    weight[static_cast<std::size_t>(to)] += node_weight[static_cast<std::size_t>(v)];
    ++count[static_cast<std::size_t>(to)];
    assign[static_cast<std::size_t>(v)] = to;
  }

  bool balanced(Index cap) const {
    return std::all_of(weight.begin(), weight.end(), [cap](Index w) { return w <= cap; });
  }
};

double weighted_cut(const SparseGraph& g, const std::vector<ClusterId>& assign) {
  double cut = 0.0;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    auto nb = g.neighbors(i);
    auto wt = g.weights(i);
    for (std::size_t e = 0; e < nb.size(); ++e)
      if (nb[e] > i && assign[static_cast<std::size_t>(i)] != assign[static_cast<std::size_t>(nb[e])]) cut += wt[e];
  }
  return cut;
}

// Single-node positive-gain moves over boundary nodes in index order. Every
// move strictly lowers the cut, never overfills its target, never empties its
// source.
void refine(RefineState& st, Index cap, int passes, int level, std::vector<RefinementPass>& log) {
  for (int pass = 0; pass < passes; ++pass) {
    const double before = weighted_cut(st.g, st.assign);
    int moves = 0;
    for (NodeId v = 0; v < st.g.num_nodes(); ++v) {
      const ClusterId own = st.assign[static_cast<std::size_t>(v)];
      if (st.count[static_cast<std::size_t>(own)] <= 1) continue;
      st.gather(v);
      const double internal = st.conn[static_cast<std::size_t>(own)];
      ClusterId best = -1;
      double best_gain = 0.0;
      for (ClusterId c : st.touched) {
        if (c == own) continue;
        if (st.weight[static_cast<std::size_t>(c)] + st.node_weight[static_cast<std::size_t>(v)] > cap) continue;
        const double gain = st.conn[static_cast<std::size_t>(c)] - internal;
        if (gain > best_gain) {
          best_gain = gain;
          best = c;
        }
      }
      if (best != -1) {
        st.move(v, best);
        ++moves;
      }
    }
    const double after = weighted_cut(st.g, st.assign);
    log.push_back({level, static_cast<Index>(std::llround(before)), static_cast<Index>(std::llround(after)),
                   st.balanced(cap)});
    if (moves == 0) break;
  }
}

// Moves nodes out of overweight clusters, choosing each time the move with the
// smallest cut increase into a cluster that stays within the cap.
void rebalance(RefineState& st, Index cap) {
  const Index k = static_cast<Index>(st.weight.size());
  for (int guard = 0; guard < 4 * static_cast<int>(st.g.num_nodes()) + 16; ++guard) {
    ClusterId over = -1;
    for (ClusterId c = 0; c < k; ++c)
      if (st.weight[static_cast<std::size_t>(c)] > cap &&
          (over == -1 || st.weight[static_cast<std::size_t>(c)] > st.weight[static_cast<std::size_t>(over)]))
        over = c;
    if (over == -1 || st.count[static_cast<std::size_t>(over)] <= 1) return;

    ClusterId lightest = 0;
    for (ClusterId c = 1; c < k; ++c)
      if (st.weight[static_cast<std::size_t>(c)] < st.weight[static_cast<std::size_t>(lightest)]) lightest = c;

    NodeId best_v = -1;
    ClusterId best_c = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (NodeId v = 0; v < st.g.num_nodes(); ++v) {
      if (st.assign[static_cast<std::size_t>(v)] != over) continue;
      const Index w = st.node_weight[static_cast<std::size_t>(v)];
      st.gather(v);
      const double internal = st.conn[static_cast<std::size_t>(over)];
      auto consider = [&](ClusterId c) {
        if (c == over || st.weight[static_cast<std::size_t>(c)] + w > cap) return;
        const double gain = st.conn[static_cast<std::size_t>(c)] - internal;
        if (gain > best_gain) {
          best_gain = gain;
          best_v = v;
          best_c = c;
        }
      };
      for (ClusterId c : st.touched) consider(c);
      consider(lightest);
    }
    if (best_v == -1) return;  // coarse weights too large to fit anywhere
    st.move(best_v, best_c);
  }
}

// A cluster left empty takes the node of the largest cluster whose removal
// costs the least cut.
void repair_empty(RefineState& st) {
  const Index k = static_cast<Index>(st.weight.size());
  for (ClusterId c = 0; c < k; ++c) {
    if (st.count[static_cast<std::size_t>(c)] > 0) continue;
    ClusterId largest = 0;
    for (ClusterId d = 1; d < k; ++d)
      if (st.count[static_cast<std::size_t>(d)] > st.count[static_cast<std::size_t>(largest)]) largest = d;
    NodeId best = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (NodeId v = 0; v < st.g.num_nodes(); ++v) {
      if (st.assign[static_cast<std::size_t>(v)] != largest) continue;
      st.gather(v);
      double external = 0.0;
      for (ClusterId t : st.touched)
        if (t != largest) external = std::max(external, st.conn[static_cast<std::size_t>(t)]);
      const double gain = external - st.conn[static_cast<std::size_t>(largest)];
      if (gain > best_gain) {
        best_gain = gain;
        best = v;
      }
    }
    st.move(best, c);
  }
}

}  // namespace

PartitionResult multilevel_partition(const SparseGraph& g, Index n_clusters, const PartitionOptions& opts) {
  const Index n = g.num_nodes();
  if (n_clusters < 1) throw ValidationError("multilevel_partition: n_clusters must be >= 1");
  if (n_clusters > n) {
    std::ostringstream os;
    os << "multilevel_partition: n_clusters=" << n_clusters << " exceeds node count " << n;
    throw ValidationError(os.str());
  }
  PartitionResult result;
  result.effective_eps = opts.balance_eps;
  if (!(opts.balance_eps >= 0.0)) {
    result.effective_eps = 0.0;
    result.balance_relaxed = true;
  }
  if (n_clusters == 1) {
    result.partition = Partition::single(n);
    return result;
  }
  if (n_clusters == n) {
    result.partition = Partition::identity(n);
    return result;
  }
  if (g.num_self_loops() > 0) throw ValidationError("multilevel_partition: graph must not contain self-loops");

  const Index cap = max_cluster_size(n, n_clusters, result.effective_eps);
  Rng rng = make_rng(opts.seed, Stream::partition);

  // Coarsening.
  std::vector<Level> levels;
  levels.push_back({g, std::vector<Index>(static_cast<std::size_t>(n), 1), {}});
  const Index stop_at = std::max<Index>(4 * n_clusters, 200);
  const Index max_pair_weight = std::max<Index>(1, cap / 2);
  while (levels.back().graph.num_nodes() > stop_at && levels.size() < 64) {
    Level& fine = levels.back();
    std::vector<NodeId> to_coarse;
    Level coarse = coarsen_once(fine.graph, fine.node_weight, max_pair_weight, rng, to_coarse);
    if (coarse.graph.num_nodes() > fine.graph.num_nodes() * 95 / 100) break;  // matching stalled
    fine.to_coarse = std::move(to_coarse);
    levels.push_back(std::move(coarse));
  }
  result.levels = static_cast<int>(levels.size());

  // Initial partition on the coarsest graph, then project and refine upward.
  const Level& coarsest = levels.back();
  std::vector<ClusterId> assign =
      initial_partition(coarsest.graph, coarsest.node_weight, n_clusters, std::max(cap, max_pair_weight), rng);
  for (int lv = static_cast<int>(levels.size()) - 1; lv >= 0; --lv) {
    const Level& level = levels[static_cast<std::size_t>(lv)];
    if (lv != static_cast<int>(levels.size()) - 1) {
      std::vector<ClusterId> projected(static_cast<std::size_t>(level.graph.num_nodes()));
      for (std::size_t v = 0; v < projected.size(); ++v) projected[v] = assign[static_cast<std::size_t>(level.to_coarse[v])];
      assign = std::move(projected);
    }
    RefineState st(level.graph, level.node_weight, assign, n_clusters);
    rebalance(st, cap);
    refine(st, cap, opts.refine_passes, lv, result.passes);
    if (lv == 0) repair_empty(st);
  }

  result.partition = Partition(std::move(assign), static_cast<ClusterId>(n_clusters));
  return result;
}

}  // namespace structcomp
