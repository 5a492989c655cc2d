#include "structcomp/compress.hpp"

#include <sstream>

#include "structcomp/error.hpp"

namespace structcomp {

namespace {

void require_rows(const DenseMatrix& x, const Partition& p, const char* what) {
  if (x.rows() != p.num_nodes()) {
    std::ostringstream os;
    os << what << ": feature matrix is " << shape_string(x) << " but the partition covers " << p.num_nodes()
       << " nodes";
    throw ValidationError(os.str());
  }
}

}  // namespace

CompressedFeatures compress_features(const DenseMatrix& x, const Partition& p, CompressMode mode) {
  require_rows(x, p, "compress_features");
  DenseMatrix out(p.num_clusters(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    auto dst = out.row(p.cluster_of(i));
    auto src = x.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
  }
  if (mode == CompressMode::mean) {
    for (ClusterId c = 0; c < p.num_clusters(); ++c) {
      const double s = static_cast<double>(p.size_of(c));
      for (double& v : out.row(c)) v /= s;
    }
  }
  return {std::move(out), p.fingerprint()};
}

CompressedGraph compress_graph(const SparseGraph& g, const Partition& p, const CompressGraphOptions& opts) {
  if (g.num_nodes() != p.num_nodes()) throw ValidationError("compress_graph: partition does not match graph");
  std::vector<double> self(static_cast<std::size_t>(p.num_clusters()), 0.0);
  std::vector<WeightedEdge> edges;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    auto nb = g.neighbors(i);
    auto wt = g.weights(i);
    const ClusterId ci = p.cluster_of(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const ClusterId cj = p.cluster_of(nb[k]);
      if (ci == cj) {
        self[static_cast<std::size_t>(ci)] += wt[k];
      } else if (nb[k] > i) {
        edges.push_back({ci, cj, wt[k]});
      }
    }
  }
  if (opts.keep_self_loops) {
    for (ClusterId c = 0; c < p.num_clusters(); ++c)
      if (self[static_cast<std::size_t>(c)] != 0.0) edges.push_back({c, c, self[static_cast<std::size_t>(c)]});
  }
  SparseGraph summed = build_weighted_graph(edges, p.num_clusters(),
                                            {.keep_self_loops = opts.keep_self_loops, .duplicates = DuplicatePolicy::sum});
  if (!opts.binarize) return {std::move(summed), std::move(self)};

  std::vector<double> ones(summed.weight_values().size(), 1.0);
  for (std::size_t k = 0; k < ones.size(); ++k)
    if (summed.weight_values()[k] <= 0.0) ones[k] = summed.weight_values()[k];
  SparseGraph binary(summed.num_nodes(), summed.offsets(), summed.indices(), std::move(ones));
  return {std::move(binary), std::move(self)};
}

CompressedFeatures drop_member_with_mask(const DenseMatrix& x, const Partition& p, std::span<const std::uint8_t> mask) {
  require_rows(x, p, "drop_member");
  if (static_cast<Index>(mask.size()) != x.rows()) throw ValidationError("drop_member: mask length must equal node count");
  DenseMatrix kept(p.num_clusters(), x.cols());
  std::vector<Index> kept_count(static_cast<std::size_t>(p.num_clusters()), 0);
  for (Index i = 0; i < x.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const ClusterId c = p.cluster_of(i);
    auto dst = kept.row(c);
    auto src = x.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    ++kept_count[static_cast<std::size_t>(c)];
  }
  bool any_empty = false;
  for (ClusterId c = 0; c < p.num_clusters(); ++c) {
    const Index s = kept_count[static_cast<std::size_t>(c)];
    if (s == 0) {
      any_empty = true;
      continue;
    }
    for (double& v : kept.row(c)) v /= static_cast<double>(s);
  }
  if (any_empty) {
    const CompressedFeatures full = compress_features(x, p, CompressMode::mean);
    for (ClusterId c = 0; c < p.num_clusters(); ++c) {
      if (kept_count[static_cast<std::size_t>(c)] != 0) continue;
      auto dst = kept.row(c);
      auto src = full.matrix.row(c);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return {std::move(kept), p.fingerprint()};
}

CompressedFeatures drop_member(const DenseMatrix& x, const Partition& p, double drop_rate, Rng& rng) {
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) {
    throw ValidationError("drop_member: drop rate must lie in [0, 1), got " + std::to_string(drop_rate));
  }
  require_rows(x, p, "drop_member");
  if (drop_rate == 0.0) return compress_features(x, p, CompressMode::mean);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(x.rows()));
  for (auto& m : mask) m = uniform01(rng) >= drop_rate ? 1 : 0;
  return drop_member_with_mask(x, p, mask);
}

DenseMatrix lift(const DenseMatrix& z_c, const Partition& p) {
  if (z_c.rows() != p.num_clusters()) {
    std::ostringstream os;
    os << "lift: cluster matrix is " << shape_string(z_c) << " but the partition has " << p.num_clusters()
       << " clusters";
    throw ValidationError(os.str());
  }
  DenseMatrix out(p.num_nodes(), z_c.cols());
  for (Index i = 0; i < p.num_nodes(); ++i) {
    auto src = z_c.row(p.cluster_of(i));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

CompressedFeatures mask_features(const CompressedFeatures& x_c, double mask_rate, Rng& rng) {
  if (!(mask_rate >= 0.0 && mask_rate < 1.0)) {
    throw ValidationError("mask_features: mask rate must lie in [0, 1), got " + std::to_string(mask_rate));
  }
  CompressedFeatures out = x_c;
  if (mask_rate == 0.0) return out;
  for (Index j = 0; j < out.matrix.cols(); ++j) {
    if (uniform01(rng) >= mask_rate) continue;
    for (Index i = 0; i < out.matrix.rows(); ++i) out.matrix(i, j) = 0.0;
  }
  return out;
}

}  // namespace structcomp
