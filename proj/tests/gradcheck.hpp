#pragma once
// Loss-through-encoder gradient checks against central finite differences.

#include <functional>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "structcomp/encoder.hpp"
#include "structcomp/losses.hpp"
#include "structcomp/rng.hpp"

namespace gradcheck {

using namespace structcomp;

enum class LossKind { sce, coles, grace, cca_ssg, sage };

inline std::string name(LossKind k) {
  switch (k) {
    case LossKind::sce: return "sce";
    case LossKind::coles: return "coles";
    case LossKind::grace: return "grace";
    case LossKind::cca_ssg: return "cca_ssg";
    case LossKind::sage: return "sage";
  }
  return "?";
}

inline const std::vector<LossKind>& all_losses() {
  static const std::vector<LossKind> k{LossKind::sce, LossKind::coles, LossKind::grace, LossKind::cca_ssg,
                                       LossKind::sage};
  return k;
}

struct Instance {
  LossKind kind;
  DenseMatrix x1;
  DenseMatrix x2;  // second view for the two-view losses
  EncoderParams params;
  SparseGraph l_pos;
  SparseGraph l_neg;
  SagePairs pairs;
};

inline Instance make_instance(LossKind kind, Arch arch, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Instance in{kind, {}, {}, {}, {}, {}, {}};
  const Index n = 4 + static_cast<Index>(rng() % 5);   // 4..8
  const Index d = 3 + static_cast<Index>(rng() % 14);  // 3..16
  const Index h = 3 + static_cast<Index>(rng() % 6);
  const Index out = 2 + static_cast<Index>(rng() % 4);
  in.x1 = DenseMatrix::random_normal(n, d, 1.0, rng);
  in.x2 = in.x1 + DenseMatrix::random_normal(n, d, 0.3, rng);
  // Redraw until no row of either view is all-zero after the hidden ReLU;
  // cosine similarity and standardization are undefined there.
  for (;;) {
    in.params = init_params(arch, d, h, out, rng, {Activation::relu, Activation::identity});
    // Glorot weights are small; scale up so the loss is not flat.
    for (auto& w : in.params.weights) w *= 1.5;
    auto z1 = encoder_forward(in.x1, in.params).first;
    auto z2 = encoder_forward(in.x2, in.params).first;
    bool ok = true;
    for (Index r = 0; r < n; ++r) ok = ok && row_norm(z1, r) > 1e-3 && row_norm(z2, r) > 1e-3;
    if (ok) break;
  }

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (uniform01(rng) < 0.4) edges.push_back({i, j});
  edges.push_back({0, static_cast<NodeId>(n - 1)});
  auto g = build_graph(edges, n);
  in.l_pos = laplacian(g, LaplacianKind::sym_normalized);
  in.l_neg = laplacian(negative_graph(n, {.num_permutations = 2}, rng), LaplacianKind::combinatorial);
  in.pairs = sample_sage_pairs(g, 2, rng);
  return in;
}

inline bool two_view(LossKind k) { return k == LossKind::grace || k == LossKind::cca_ssg; }

// Loss value and gradients with respect to the encoder weights.
inline LossValueGrad evaluate(const Instance& in) {
  auto [z1, tape1] = encoder_forward(in.x1, in.params);
  LossValueGrad out;
  if (two_view(in.kind)) {
    auto [z2, tape2] = encoder_forward(in.x2, in.params);
    auto lv = in.kind == LossKind::grace ? infonce_loss(z1, z2, 0.5) : cca_ssg_loss(z1, z2, 0.05);
    out.value = lv.value;
    out.grads = encoder_backward(tape1, in.params, lv.grads[0]);
    auto g2 = encoder_backward(tape2, in.params, lv.grads[1]);
    for (std::size_t k = 0; k < out.grads.size(); ++k) out.grads[k] += g2[k];
    return out;
  }
  LossValueGrad lv;
  switch (in.kind) {
    case LossKind::sce: lv = sce_loss(z1, in.l_neg, 1.0); break;
    case LossKind::coles: lv = coles_loss(z1, in.l_pos, in.l_neg); break;
    default: lv = sage_single_view_loss(z1, in.pairs.pos, in.pairs.neg); break;
  }
  out.value = lv.value;
  out.grads = encoder_backward(tape1, in.params, lv.grads[0]);
  return out;
}

// Worst relative error over every weight entry of the instance.
inline double max_relative_error(Instance& in, double eps = 1e-6) {
  auto analytic = evaluate(in);
  double worst = 0.0;
  for (std::size_t k = 0; k < in.params.weights.size(); ++k) {
    worst = std::max(worst, oracle::fd_check(in.params.weights[k], analytic.grads[k],
                                             [&] { return evaluate(in).value; }, eps));
  }
  return worst;
}

}  // namespace gradcheck
