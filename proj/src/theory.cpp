#include "structcomp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "structcomp/compress.hpp"
#include "structcomp/encoder.hpp"
#include "structcomp/error.hpp"
#include "structcomp/losses.hpp"

namespace structcomp {

namespace {

SparseGraph draw_er(Index n, double p, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (uniform01(rng) < p) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
  return build_graph(edges, n);
}

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

BoundReport theorem1_bound(const SparseGraph& g, const Partition& p, const DenseMatrix& x, const DenseMatrix& w) {
  if (g.num_nodes() != p.num_nodes() || x.rows() != g.num_nodes() || x.cols() != w.rows()) {
    throw ValidationError("theorem1_bound: inconsistent shapes (graph " + std::to_string(g.num_nodes()) + ", X " +
                          shape_string(x) + ", W " + shape_string(w) + ")");
  }
  BoundReport r;
  r.n = g.num_nodes();
  r.n_clusters = p.num_clusters();

  const DenseMatrix xw = matmul(x, w);
  const DenseMatrix f_graph = spmm(g, xw);
  std::vector<NodePair> edges;
  for (const auto& e : g.edge_list())
    if (e.first != e.second) edges.push_back(e);
  r.loss_graph = positive_pair_distance_loss(f_graph, edges);

  const DenseMatrix f_clusters = compress_features(xw, p, CompressMode::sum).matrix;
  std::vector<NodePair> cluster_pairs;
  {
    std::vector<std::pair<ClusterId, ClusterId>> raw;
    for (const auto& [u, v] : edges) {
      const ClusterId a = p.cluster_of(u);
      const ClusterId b = p.cluster_of(v);
      if (a != b) raw.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    for (const auto& [a, b] : raw) cluster_pairs.emplace_back(a, b);
  }
  r.loss_compressed = positive_pair_distance_loss(f_clusters, cluster_pairs);

  r.remainder_norm = partition_remainder_norm(g, p);
  r.feature_bound = max_row_norm(x);
  r.weight_norm = w.size() == 0 || max_abs(w) == 0.0 ? 0.0 : spectral_norm(w);
  r.lhs = std::abs(r.loss_graph - r.loss_compressed);
  r.rhs = r.remainder_norm * r.feature_bound * r.weight_norm;
  r.slack = r.rhs - r.lhs;
  r.holds = r.lhs <= r.rhs + 1e-9;
  return r;
}

BoundReport check_theorem1(Index n, double p, Index n_clusters, Index d, Index d_out, std::uint64_t seed) {
  if (n_clusters < 1 || n % n_clusters != 0) throw ValidationError("check_theorem1: n_clusters must divide n");
  Rng rng = make_rng(seed, Stream::theory);
  SparseGraph g;
  for (int attempt = 0;; ++attempt) {
    g = draw_er(n, p, rng);
    if (g.num_edges() > 0) break;
    if (attempt == 9) throw DegenerateError("check_theorem1: G(n, p) drew no edges in 10 attempts");
  }
  const Partition part = even_partition(n, n_clusters, seed);
  const DenseMatrix x = DenseMatrix::random_uniform(n, d, -1.0, 1.0, rng);
  const DenseMatrix w = DenseMatrix::random_uniform(d, d_out, -1.0, 1.0, rng);
  BoundReport r = theorem1_bound(g, part, x, w);
  r.p = p;
  r.seed = seed;
  return r;
}

ScalarPairs standard_scalar_set() {
  ScalarPairs s;
  s.h = {0.25, 0.79, 0.55, -0.55, -0.40, 0.75, -0.99, 0.64};
  const auto n = static_cast<NodeId>(s.h.size());
  s.pos.resize(s.h.size());
  s.neg.resize(s.h.size());
  for (NodeId i = 0; i < n; ++i) {
    s.pos[static_cast<std::size_t>(i)] = {static_cast<NodeId>((i + 1) % n)};
    s.neg[static_cast<std::size_t>(i)] = {static_cast<NodeId>((i + 2) % n), static_cast<NodeId>((i + 3) % n)};
  }
  return s;
}

double theorem2_phi(double hi, double hj) {
  // Softmax weights of the two logits hᵢ² and hᵢhⱼ; the numerator over the
  // squared normalizer is the weighted variance of {hᵢ, hⱼ}.
  const double a = hi * hi;
  const double b = hi * hj;
  const double m = std::max(a, b);
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  const double s = ea + eb;
  const double num = (ea * hi * hi + eb * hj * hj) * s - (ea * hi + eb * hj) * (ea * hi + eb * hj);
  return num / (2.0 * s * s);
}

namespace {

// Loss terms that depend on anchor i, as a function of its noisy value t.
double anchor_terms(const ScalarPairs& s, std::size_t i, double t) {
  double v = 0.0;
  const double hi = s.h[i];
  for (NodeId j : s.pos[i]) v += t * s.h[static_cast<std::size_t>(j)];
  for (NodeId j : s.neg[i]) v += log_add_exp(t * hi, t * s.h[static_cast<std::size_t>(j)]);
  return v;
}

void validate_pairs(const ScalarPairs& s) {
  const auto n = static_cast<NodeId>(s.h.size());
  if (s.pos.size() != s.h.size() || s.neg.size() != s.h.size())
    throw ValidationError("scalar pairs: pos and neg need one list per node");
  for (const auto* lists : {&s.pos, &s.neg})
    for (const auto& l : *lists)
      for (NodeId j : l)
        if (j < 0 || j >= n) throw ValidationError("scalar pairs: index " + std::to_string(j) + " out of range");
}

}  // namespace

double scalar_infonce(const ScalarPairs& s, std::span<const double> anchors) {
  validate_pairs(s);
  if (anchors.size() != s.h.size()) throw ValidationError("scalar_infonce: one anchor value per node required");
  double v = 0.0;
  for (std::size_t i = 0; i < s.h.size(); ++i) v += anchor_terms(s, i, anchors[i]);
  return v;
}

Theorem2Report check_theorem2(const ScalarPairs& s, double sigma, std::int64_t mc_samples, std::uint64_t seed) {
  validate_pairs(s);
  if (!(sigma >= 0.0)) throw ValidationError("check_theorem2: sigma must be >= 0");
  if (mc_samples < 1) throw ValidationError("check_theorem2: mc_samples must be >= 1");
  Theorem2Report r;
  r.sigma = sigma;
  r.mc_samples = mc_samples;
  r.loss_clean = scalar_infonce(s, s.h);
  for (std::size_t i = 0; i < s.h.size(); ++i)
    for (NodeId j : s.neg[i]) r.sum_phi += theorem2_phi(s.h[i], s.h[static_cast<std::size_t>(j)]);
  r.regularizer = r.sum_phi * (sigma * sigma);
  r.analytic_value = r.loss_clean + r.regularizer;
  r.printed_value = r.loss_clean + 0.5 * r.regularizer;
  r.sigma_cubed = sigma * sigma * sigma;

  if (sigma == 0.0) {
    r.mc_estimate = r.loss_clean;
    return r;
  }

  // Antithetic pairs (±z) rescaled so the sample second moment is exactly 1.
  Rng rng = make_rng(seed, Stream::theory);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::int64_t half = std::max<std::int64_t>(1, mc_samples / 2);
  std::vector<double> z(static_cast<std::size_t>(half));
  double second = 0.0;
  for (double& v : z) {
    v = normal(rng);
    second += v * v;
  }
  const double rescale = 1.0 / std::sqrt(second / static_cast<double>(half));
  for (double& v : z) v *= rescale;

  // The loss is a sum of per-anchor terms, each depending on one noisy value,
  // so E[L̃] = Σᵢ E[fᵢ(hᵢ + σz)].
  double mean = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < s.h.size(); ++i) {
    double acc = 0.0;
    double acc2 = 0.0;
    for (double v : z) {
      const double pair = 0.5 * (anchor_terms(s, i, s.h[i] + sigma * v) + anchor_terms(s, i, s.h[i] - sigma * v));
      acc += pair;
      acc2 += pair * pair;
    }
    const double m = acc / static_cast<double>(half);
    mean += m;
    var += std::max(0.0, acc2 / static_cast<double>(half) - m * m) / static_cast<double>(half);
  }
  r.mc_estimate = mean;
  r.mc_stderr = std::sqrt(var);
  r.difference = std::abs(r.mc_estimate - r.analytic_value);
  return r;
}

double check_appendix_c(Index n, Index n_clusters, Index d, Index h, Index d_out, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::theory);
  const Partition p = random_partition(n, n_clusters, rng);
  const DenseMatrix x = DenseMatrix::random_uniform(n, d, -1.0, 1.0, rng);
  EncoderParams params;
  params.arch = Arch::mlp2;
  params.weights = {DenseMatrix::random_uniform(d, h, -1.0, 1.0, rng),
                    DenseMatrix::random_uniform(h, d_out, -1.0, 1.0, rng)};

  auto relu = [](DenseMatrix m) {
    for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
    return m;
  };
  const DenseMatrix mix = matmul_nt(p.binary_matrix(), p.normalized_matrix());  // P†Pᵀ
  const DenseMatrix lhs = relu(matmul(mix, matmul(relu(matmul(mix, matmul(x, params.weights[0]))), params.weights[1])));
  const DenseMatrix rhs = lift(mlp_forward(compress_features(x, p).matrix, params).first, p);
  return max_abs_diff(lhs, rhs);
}

SpectralReport spectral_equality(const Partition& p, const DenseMatrix& x, const DenseMatrix& wa,
                                 const DenseMatrix& wb) {
  const DenseMatrix xc = compress_features(x, p).matrix;
  const DenseMatrix e1 = matmul(xc, wa);
  const DenseMatrix e2 = matmul(xc, wb);
  SpectralReport r;
  r.compressed = spectral_contrastive_loss(e1, e2);
  r.lifted = spectral_contrastive_loss(lift(e1, p), lift(e2, p));
  r.deviation = std::abs(r.compressed - r.lifted);
  return r;
}

SpectralReport check_appendix_d_spectral(Index n, Index n_clusters, Index d, std::uint64_t seed) {
  if (n_clusters < 1 || n % n_clusters != 0) {
    throw ValidationError("check_appendix_d_spectral: the equality needs an even partition; n_clusters=" +
                          std::to_string(n_clusters) + " does not divide n=" + std::to_string(n));
  }
  Rng rng = make_rng(seed, Stream::theory);
  const Partition p = even_partition(n, n_clusters, seed);
  const DenseMatrix x = DenseMatrix::random_uniform(n, d, -1.0, 1.0, rng);
  const DenseMatrix wa = DenseMatrix::random_uniform(d, d, -1.0, 1.0, rng);
  const DenseMatrix wb = DenseMatrix::random_uniform(d, d, -1.0, 1.0, rng);
  return spectral_equality(p, x, wa, wb);
}

BoundReport check_appendix_d_lipschitz(const SparseGraph& g, const Partition& p, const DenseMatrix& x,
                                       const DenseMatrix& w, int k,
                                       const std::function<double(const DenseMatrix&)>& loss, double lipschitz_l,
                                       bool force) {
  if (k < 0) throw ValidationError("check_appendix_d_lipschitz: k must be >= 0");
  if (k > 3 && !force) throw ValidationError("check_appendix_d_lipschitz: k > 3 densifies Â^k; pass force to allow");
  if (g.num_nodes() != p.num_nodes() || x.rows() != g.num_nodes() || x.cols() != w.rows())
    throw ValidationError("check_appendix_d_lipschitz: inconsistent shapes");
  const DenseMatrix mix = matmul_nt(p.binary_matrix(), p.normalized_matrix());
  const DenseMatrix a_k = sparse_power(normalized_adjacency(g), k).to_dense();
  const DenseMatrix xw = matmul(x, w);

  BoundReport r;
  r.n = g.num_nodes();
  r.n_clusters = p.num_clusters();
  r.loss_compressed = loss(matmul(mix, xw));
  r.loss_graph = loss(matmul(a_k, xw));
  auto norm = [](const DenseMatrix& m) { return max_abs(m) == 0.0 ? 0.0 : spectral_norm(m); };
  r.remainder_norm = norm(mix - a_k);
  r.feature_bound = norm(x);
  r.weight_norm = norm(w);
  r.lhs = std::abs(r.loss_compressed - r.loss_graph);
  r.rhs = lipschitz_l * r.remainder_norm * r.feature_bound * r.weight_norm;
  r.slack = r.rhs - r.lhs;
  r.holds = r.lhs <= r.rhs + 1e-9;
  return r;
}

}  // namespace structcomp
