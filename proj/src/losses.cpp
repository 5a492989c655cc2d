#include "structcomp/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "structcomp/error.hpp"

namespace structcomp {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_nodes(const SparseGraph& l, const DenseMatrix& z, const char* what) {
  if (l.num_nodes() != z.rows()) {
    std::ostringstream os;
    os << what << ": Laplacian has " << l.num_nodes() << " nodes but embeddings are " << shape_string(z);
    throw ValidationError(os.str());
  }
}

// Row-normalized copy and the original row norms.
DenseMatrix normalize_rows(const DenseMatrix& z, std::vector<double>& norms, const char* view) {
  DenseMatrix out = z;
  norms.resize(static_cast<std::size_t>(z.rows()));
  for (Index i = 0; i < z.rows(); ++i) {
    const double nrm = row_norm(z, i);
    if (!(nrm > 0.0)) {
      std::ostringstream os;
      os << "infonce_loss: row " << i << " of " << view << " has zero norm; cosine similarity is undefined";
      throw DegenerateError(os.str());
    }
    norms[static_cast<std::size_t>(i)] = nrm;
    for (double& v : out.row(i)) v /= nrm;
  }
  return out;
}

// Gradient through u = z / ‖z‖ row by row.
DenseMatrix normalize_rows_backward(const DenseMatrix& grad_u, const DenseMatrix& u, const std::vector<double>& norms) {
  DenseMatrix out(grad_u.rows(), grad_u.cols());
  for (Index i = 0; i < u.rows(); ++i) {
    auto g = grad_u.row(i);
    auto ui = u.row(i);
    double proj = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) proj += g[j] * ui[j];
    auto o = out.row(i);
    for (std::size_t j = 0; j < g.size(); ++j) o[j] = (g[j] - proj * ui[j]) / norms[static_cast<std::size_t>(i)];
  }
  return out;
}

// One InfoNCE direction. For each anchor i: positive cross[i][i], negatives
// cross[i][k] (k ≠ i) and intra[i][k] (k ≠ i). Accumulates ∂(sum of anchor
// losses)/∂cross into g_cross and ∂/∂intra into g_intra (both scaled by
// `scale`), and returns the summed anchor loss.
double infonce_direction(const DenseMatrix& cross, const DenseMatrix& intra, double scale, DenseMatrix& g_cross,
                         DenseMatrix& g_intra) {
  const Index n = cross.rows();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    auto c = cross.row(i);
    auto s = intra.row(i);
    double m = -std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n; ++k) {
      m = std::max(m, c[static_cast<std::size_t>(k)]);
      if (k != i) m = std::max(m, s[static_cast<std::size_t>(k)]);
    }
    double denom = 0.0;
    for (Index k = 0; k < n; ++k) {
      denom += std::exp(c[static_cast<std::size_t>(k)] - m);
      if (k != i) denom += std::exp(s[static_cast<std::size_t>(k)] - m);
    }
    total += -(c[static_cast<std::size_t>(i)] - m) + std::log(denom);
    auto gc = g_cross.row(i);
    auto gs = g_intra.row(i);
    for (Index k = 0; k < n; ++k) {
      gc[static_cast<std::size_t>(k)] += scale * std::exp(c[static_cast<std::size_t>(k)] - m) / denom;
      if (k != i) gs[static_cast<std::size_t>(k)] += scale * std::exp(s[static_cast<std::size_t>(k)] - m) / denom;
    }
    gc[static_cast<std::size_t>(i)] -= scale;
  }
  return total;
}

}  // namespace

SparseGraph negative_graph(Index n_nodes, const NegativeSampleSpec& spec, Rng& rng) {
  if (n_nodes < 2) throw ValidationError("negative_graph: need at least 2 nodes");
  if (spec.num_permutations < 1) throw ValidationError("negative_graph: num_permutations must be >= 1");
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(static_cast<std::size_t>(n_nodes * spec.num_permutations));
  std::vector<NodeId> perm(static_cast<std::size_t>(n_nodes));
  for (int p = 0; p < spec.num_permutations; ++p) {
    std::iota(perm.begin(), perm.end(), NodeId{0});
    for (Index i = n_nodes - 1; i > 0; --i) {
      std::uniform_int_distribution<Index> pick(0, i - 1);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    for (Index i = 0; i < n_nodes; ++i) edges.emplace_back(static_cast<NodeId>(i), perm[static_cast<std::size_t>(i)]);
  }
  return build_graph(edges, n_nodes);
}

double laplacian_quadratic(const SparseGraph& laplacian, const DenseMatrix& z, DenseMatrix* grad) {
  require_nodes(laplacian, z, "laplacian_quadratic");
  DenseMatrix lz = sparse_product(laplacian, z);
  const double value = inner(z, lz);
  if (grad) *grad = lz * 2.0;
  return value;
}

LossValueGrad sce_loss(const DenseMatrix& z, const SparseGraph& l_neg, double alpha) {
  DenseMatrix grad_trace;
  const double trace = laplacian_quadratic(l_neg, z, &grad_trace);
  if (!(trace > 0.0)) {
    std::ostringstream os;
    os << "sce_loss: Tr(Zᵀ L^neg Z) = " << trace << " is not positive (degenerate embeddings)";
    throw DegenerateError(os.str());
  }
  LossValueGrad out;
  out.value = alpha / trace;
  out.grads.push_back(grad_trace * (-alpha / (trace * trace)));
  return out;
}

LossValueGrad coles_loss(const DenseMatrix& z, const SparseGraph& l_pos, const SparseGraph& l_neg) {
  DenseMatrix g_pos;
  DenseMatrix g_neg;
  const double pos = laplacian_quadratic(l_pos, z, &g_pos);
  const double neg = laplacian_quadratic(l_neg, z, &g_neg);
  LossValueGrad out;
  out.value = pos - neg;
  out.grads.push_back(g_pos - g_neg);
  return out;
}

LossValueGrad infonce_loss(const DenseMatrix& z1, const DenseMatrix& z2, double tau) {
  require_same_shape(z1, z2, "infonce_loss");
  if (!(tau > 0.0)) throw ValidationError("infonce_loss: temperature must be positive");
  const Index n = z1.rows();
  if (n < 1) throw ValidationError("infonce_loss: no embeddings");

  std::vector<double> n1;
  std::vector<double> n2;
  const DenseMatrix u = normalize_rows(z1, n1, "view 1");
  const DenseMatrix v = normalize_rows(z2, n2, "view 2");
  const double inv_tau = 1.0 / tau;
  const DenseMatrix s12 = matmul_nt(u, v) * inv_tau;
  const DenseMatrix s11 = matmul_nt(u, u) * inv_tau;
  const DenseMatrix s22 = matmul_nt(v, v) * inv_tau;
  const DenseMatrix s21 = transpose(s12);

  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  DenseMatrix g12(n, n);
  DenseMatrix g21(n, n);
  DenseMatrix g11(n, n);
  DenseMatrix g22(n, n);
  double total = infonce_direction(s12, s11, scale, g12, g11);
  total += infonce_direction(s21, s22, scale, g21, g22);
  g12 += transpose(g21);

  // S12 = U Vᵀ/τ, S11 = U Uᵀ/τ, S22 = V Vᵀ/τ.
  g11 += transpose(g11);
  g22 += transpose(g22);
  DenseMatrix grad_u = (matmul(g12, v) + matmul(g11, u)) * inv_tau;
  DenseMatrix grad_v = (matmul_tn(g12, u) + matmul(g22, v)) * inv_tau;

  LossValueGrad out;
  out.value = total * scale;
  out.grads.push_back(normalize_rows_backward(grad_u, u, n1));
  out.grads.push_back(normalize_rows_backward(grad_v, v, n2));
  return out;
}

LossValueGrad sage_single_view_loss(const DenseMatrix& z, std::span<const NodePair> pos_pairs,
                                    std::span<const NodePair> neg_pairs) {
  if (pos_pairs.empty()) throw ValidationError("sage_single_view_loss: no positive pairs");
  auto check = [&](const NodePair& p, const char* kind) {
    if (p.first < 0 || p.first >= z.rows() || p.second < 0 || p.second >= z.rows()) {
      std::ostringstream os;
      os << "sage_single_view_loss: " << kind << " pair (" << p.first << ", " << p.second << ") out of range for "
         << z.rows() << " rows";
      throw ValidationError(os.str());
    }
  };
  LossValueGrad out;
  out.grads.emplace_back(z.rows(), z.cols());
  DenseMatrix& g = out.grads.front();
  const double scale = 1.0 / static_cast<double>(pos_pairs.size());

  // sign = +1: −log σ(zᵤᵀzᵥ) = softplus(−s);  sign = −1: −log σ(−s) = softplus(s).
  auto accumulate = [&](const NodePair& p, double sign) {
    auto zu = z.row(p.first);
    auto zv = z.row(p.second);
    double s = 0.0;
    for (std::size_t j = 0; j < zu.size(); ++j) s += zu[j] * zv[j];
    out.value += softplus(-sign * s);
    const double ds = -sign * sigmoid(-sign * s) * scale;
    auto gu = g.row(p.first);
    auto gv = g.row(p.second);
    for (std::size_t j = 0; j < zu.size(); ++j) {
      gu[j] += ds * zv[j];
      gv[j] += ds * zu[j];
    }
  };
  for (const auto& p : pos_pairs) {
    check(p, "positive");
    accumulate(p, 1.0);
  }
  for (const auto& p : neg_pairs) {
    check(p, "negative");
    accumulate(p, -1.0);
  }
  out.value *= scale;
  return out;
}

SagePairs sample_sage_pairs(const SparseGraph& graph, int negatives_per_anchor, Rng& rng) {
  if (negatives_per_anchor < 1) throw ValidationError("sample_sage_pairs: K must be >= 1");
  const Index n = graph.num_nodes();
  SagePairs out;
  std::uniform_int_distribution<Index> pick(0, std::max<Index>(n - 1, 0));
  for (Index u = 0; u < n; ++u) {
    const Index non_neighbors = n - 1 - (graph.degree(u) - (graph.has_edge(u, u) ? 1 : 0));
    for (NodeId v : graph.neighbors(u)) {
      if (v == u) continue;
      out.pos.emplace_back(static_cast<NodeId>(u), v);
      if (non_neighbors <= 0) continue;
      for (int k = 0; k < negatives_per_anchor; ++k) {
        Index cand = pick(rng);
        while (cand == u || graph.has_edge(u, cand)) cand = pick(rng);
        out.neg.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(cand));
      }
    }
  }
  return out;
}

namespace {

struct Standardized {
  DenseMatrix x_hat;  // (z − μ)/σ
  std::vector<double> sigma;
};

Standardized standardize(const DenseMatrix& z) {
  const Index n = z.rows();
  Standardized out{DenseMatrix(n, z.cols()), std::vector<double>(static_cast<std::size_t>(z.cols()))};
  for (Index j = 0; j < z.cols(); ++j) {
    double mean = 0.0;
    for (Index i = 0; i < n; ++i) mean += z(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (Index i = 0; i < n; ++i) var += (z(i, j) - mean) * (z(i, j) - mean);
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
      throw DegenerateError("cca_ssg_loss: column " + std::to_string(j) + " has zero variance");
    }
    out.sigma[static_cast<std::size_t>(j)] = sd;
    for (Index i = 0; i < n; ++i) out.x_hat(i, j) = (z(i, j) - mean) / sd;
  }
  return out;
}

DenseMatrix standardize_backward(const DenseMatrix& grad_x_hat, const Standardized& st) {
  const Index n = grad_x_hat.rows();
  DenseMatrix out(n, grad_x_hat.cols());
  for (Index j = 0; j < grad_x_hat.cols(); ++j) {
    double mean_g = 0.0;
    double mean_gx = 0.0;
    for (Index i = 0; i < n; ++i) {
      mean_g += grad_x_hat(i, j);
      mean_gx += grad_x_hat(i, j) * st.x_hat(i, j);
    }
    mean_g /= static_cast<double>(n);
    mean_gx /= static_cast<double>(n);
    const double inv_sd = 1.0 / st.sigma[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) out(i, j) = inv_sd * (grad_x_hat(i, j) - mean_g - st.x_hat(i, j) * mean_gx);
  }
  return out;
}

}  // namespace

DenseMatrix standardize_columns(const DenseMatrix& z) {
  if (z.rows() < 2) throw ValidationError("standardize_columns: need at least 2 rows");
  return standardize(z).x_hat * (1.0 / std::sqrt(static_cast<double>(z.rows())));
}

LossValueGrad cca_ssg_loss(const DenseMatrix& z1, const DenseMatrix& z2, double lambda) {
  require_same_shape(z1, z2, "cca_ssg_loss");
  const Index n = z1.rows();
  if (n < 2) throw ValidationError("cca_ssg_loss: need at least 2 rows");
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const Standardized s1 = standardize(z1);
  const Standardized s2 = standardize(z2);
  const DenseMatrix t1 = s1.x_hat * inv_sqrt_n;
  const DenseMatrix t2 = s2.x_hat * inv_sqrt_n;

  const DenseMatrix diff = t1 - t2;
  const DenseMatrix eye = DenseMatrix::identity(z1.cols());
  const DenseMatrix c1 = matmul_tn(t1, t1) - eye;
  const DenseMatrix c2 = matmul_tn(t2, t2) - eye;

  LossValueGrad out;
  out.value = inner(diff, diff) + lambda * (inner(c1, c1) + inner(c2, c2));

  const DenseMatrix g_t1 = diff * 2.0 + matmul(t1, c1) * (4.0 * lambda);
  const DenseMatrix g_t2 = diff * -2.0 + matmul(t2, c2) * (4.0 * lambda);
  out.grads.push_back(standardize_backward(g_t1 * inv_sqrt_n, s1));
  out.grads.push_back(standardize_backward(g_t2 * inv_sqrt_n, s2));
  return out;
}

double spectral_contrastive_loss(const DenseMatrix& e1, const DenseMatrix& e2) {
  require_same_shape(e1, e2, "spectral_contrastive_loss");
  const Index n = e1.rows();
  if (n == 0) return 0.0;
  const double nn = static_cast<double>(n);
  const double aligned = inner(e1, e2);
  // Σᵢ Σⱼ (e1ᵢᵀe2ⱼ)² = ⟨E1ᵀE1, E2ᵀE2⟩.
  const double spread = inner(matmul_tn(e1, e1), matmul_tn(e2, e2));
  return -2.0 / nn * aligned + spread / (nn * nn);
}

double positive_pair_distance_loss(const DenseMatrix& f, std::span<const NodePair> pairs) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [u, v] : pairs) {
    if (u < 0 || u >= f.rows() || v < 0 || v >= f.rows()) {
      std::ostringstream os;
      os << "positive_pair_distance_loss: pair (" << u << ", " << v << ") out of range for " << f.rows() << " rows";
      throw ValidationError(os.str());
    }
    auto a = f.row(u);
    auto b = f.row(v);
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
    total += std::sqrt(acc);
  }
  return total / static_cast<double>(pairs.size());
}

}  // namespace structcomp
