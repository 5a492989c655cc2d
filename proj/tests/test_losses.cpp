#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "oracle.hpp"
#include "structcomp/error.hpp"
#include "structcomp/losses.hpp"

using namespace structcomp;

namespace {

SparseGraph single_edge() {
  std::vector<std::pair<NodeId, NodeId>> e{{0, 1}};
  return build_graph(e, 2);
}

SparseGraph identity_graph(Index n) {
  std::vector<WeightedEdge> e;
  for (NodeId i = 0; i < n; ++i) e.push_back({i, i, 1.0});
  return build_weighted_graph(e, n, {.keep_self_loops = true});
}

// Direct InfoNCE with cosine similarity, both views as anchors.
double infonce_oracle(const oracle::Mat& a, const oracle::Mat& b, double tau) {
  oracle::Mat an = a.rowwise().normalized();
  oracle::Mat bn = b.rowwise().normalized();
  const Eigen::Index n = a.rows();
  double total = 0.0;
  for (int view = 0; view < 2; ++view) {
    const oracle::Mat& u = view == 0 ? an : bn;
    const oracle::Mat& v = view == 0 ? bn : an;
    for (Eigen::Index i = 0; i < n; ++i) {
      double pos = std::exp(u.row(i).dot(v.row(i)) / tau);
      double denom = pos;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == i) continue;
        denom += std::exp(u.row(i).dot(u.row(k)) / tau) + std::exp(u.row(i).dot(v.row(k)) / tau);
      }
      total -= std::log(pos / denom);
    }
  }
  return total / (2.0 * static_cast<double>(n));
}

oracle::Mat standardize(const oracle::Mat& z) {
  oracle::Mat c = z.rowwise() - z.colwise().mean();
  const double n = static_cast<double>(z.rows());
  Eigen::RowVectorXd sd = (c.colwise().squaredNorm() / n).array().sqrt();
  return (c.array().rowwise() / sd.array()).matrix() / std::sqrt(n);
}

}  // namespace

TEST_CASE("negative graph") {
  Rng rng = make_rng(1);
  auto two = negative_graph(2, {.num_permutations = 1}, rng);
  CHECK(two.num_edges() == 1);
  CHECK(two.has_edge(0, 1));

  Rng a = make_rng(5);
  Rng b = make_rng(5);
  CHECK(negative_graph(30, {.num_permutations = 2}, a) == negative_graph(30, {.num_permutations = 2}, b));

  auto big = negative_graph(100, {.num_permutations = 3}, rng);
  for (Index i = 0; i < 100; ++i) {
    CHECK(big.degree(i) >= 1);
    CHECK_FALSE(big.has_edge(i, i));
  }
}

TEST_CASE("sce loss") {
  auto z = DenseMatrix::from_rows({{1}, {1}});
  CHECK(sce_loss(z, identity_graph(2), 1.0).value == doctest::Approx(0.5));
  CHECK(sce_loss(z * 3.0, identity_graph(2), 1.0).value == doctest::Approx(0.5 / 9.0));
  CHECK(sce_loss(z, identity_graph(2), 2.0).value == doctest::Approx(1.0));
  CHECK_THROWS_AS(sce_loss(DenseMatrix(2, 1), identity_graph(2), 1.0), DegenerateError);
}

TEST_CASE("coles loss") {
  Rng rng = make_rng(2);
  auto z = DenseMatrix::random_normal(6, 3, 1.0, rng);
  auto l = laplacian(negative_graph(6, {}, rng), LaplacianKind::combinatorial);
  CHECK(coles_loss(z, l, l).value == 0.0);
  CHECK(coles_loss(DenseMatrix(6, 3), l, l).value == 0.0);
  auto lp = laplacian(single_edge(), LaplacianKind::combinatorial);
  auto ln = laplacian(SparseGraph(2), LaplacianKind::combinatorial);
  CHECK(coles_loss(DenseMatrix::from_rows({{1}, {0}}), lp, ln).value == doctest::Approx(1.0));
  CHECK(coles_loss(DenseMatrix::from_rows({{1}, {0}}), ln, lp).value == doctest::Approx(-1.0));
}

TEST_CASE("infonce loss") {
  auto z = DenseMatrix::from_rows({{1, 0}, {0, 1}});
  const double per_anchor = -std::log(std::exp(1.0) / (std::exp(1.0) + 2.0));
  CHECK(infonce_loss(z, z, 1.0).value == doctest::Approx(per_anchor).epsilon(1e-14));
  CHECK(per_anchor == doctest::Approx(0.55144).epsilon(1e-5));

  Rng rng = make_rng(3);
  for (int t = 0; t < 5; ++t) {
    auto a = DenseMatrix::random_normal(7, 4, 1.0, rng);
    auto b = DenseMatrix::random_normal(7, 4, 1.0, rng);
    CHECK(infonce_loss(a, b, 0.5).value ==
          doctest::Approx(infonce_oracle(oracle::to_eigen(a), oracle::to_eigen(b), 0.5)).epsilon(1e-12));
    // Cosine similarity ignores row scale.
    CHECK(infonce_loss(a * 3.0, b, 0.5).value == doctest::Approx(infonce_loss(a, b, 0.5).value).epsilon(1e-12));
  }
  auto zero_row = DenseMatrix::from_rows({{0, 0}, {1, 0}});
  CHECK_THROWS_AS(infonce_loss(zero_row, z, 0.5), DegenerateError);
  CHECK_THROWS_AS(infonce_loss(z, z, 0.0), ValidationError);
}

TEST_CASE("sage single-view loss") {
  auto z = DenseMatrix::from_rows({{1, 0}, {0, 1}, {0, 1}});
  std::vector<NodePair> pos{{0, 1}};
  std::vector<NodePair> neg{{0, 1}, {0, 2}};
  CHECK(sage_single_view_loss(z, pos, neg).value == doctest::Approx(3.0 * std::log(2.0)));

  auto aligned = DenseMatrix::from_rows({{1, 0}, {1, 0}, {0, 1}});
  std::vector<NodePair> neg2{{0, 2}, {0, 2}};
  const double expected = std::log1p(std::exp(-1.0)) + 2.0 * std::log(2.0);
  CHECK(sage_single_view_loss(aligned, pos, neg2).value == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("sage pair sampling") {
  std::vector<std::pair<NodeId, NodeId>> e{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}};
  auto g = build_graph(e, 6);
  Rng rng = make_rng(4);
  auto pairs = sample_sage_pairs(g, 3, rng);
  CHECK(pairs.pos.size() == 12);
  CHECK(pairs.neg.size() == 36);
  for (auto [u, v] : pairs.neg) {
    CHECK(u != v);
    CHECK_FALSE(g.has_edge(u, v));
  }
}

TEST_CASE("cca-ssg loss") {
  Rng rng = make_rng(5);
  // Columns of an orthogonal matrix orthogonal to the ones vector standardize to themselves.
  oracle::Mat q = Eigen::HouseholderQR<oracle::Mat>(oracle::Mat::Random(6, 6)).householderQ();
  oracle::Mat ones = oracle::Mat::Ones(6, 1) / std::sqrt(6.0);
  oracle::Mat basis(6, 3);
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd v = q.col(c + 1) - ones * (ones.transpose() * q.col(c + 1));
    for (int k = 0; k < c; ++k) v -= basis.col(k) * basis.col(k).dot(v);
    basis.col(c) = v.normalized();
  }
  auto z = oracle::from_eigen(basis);
  CHECK(cca_ssg_loss(z, z, 0.5).value == doctest::Approx(0.0).epsilon(1e-12));

  // Swapping two columns of one view costs exactly 2·‖e₁ − e₂‖² = 4 in the invariance term.
  auto swapped = z;
  for (Index r = 0; r < 6; ++r) std::swap(swapped(r, 0), swapped(r, 1));
  CHECK(cca_ssg_loss(z, swapped, 0.5).value == doctest::Approx(4.0).epsilon(1e-10));

  for (int t = 0; t < 5; ++t) {
    auto a = DenseMatrix::random_normal(8, 3, 1.0, rng);
    auto b = DenseMatrix::random_normal(8, 3, 1.0, rng);
    oracle::Mat sa = standardize(oracle::to_eigen(a));
    oracle::Mat sb = standardize(oracle::to_eigen(b));
    oracle::Mat id = oracle::Mat::Identity(3, 3);
    const double ref = (sa - sb).squaredNorm() +
                       0.1 * ((sa.transpose() * sa - id).squaredNorm() + (sb.transpose() * sb - id).squaredNorm());
    CHECK(cca_ssg_loss(a, b, 0.1).value == doctest::Approx(ref).epsilon(1e-12));
    CHECK((oracle::to_eigen(standardize_columns(a)) - sa).cwiseAbs().maxCoeff() < 1e-14);
  }
  auto flat = DenseMatrix::from_rows({{1, 2}, {1, 3}});
  CHECK_THROWS_AS(cca_ssg_loss(flat, flat, 0.1), DegenerateError);
  CHECK_THROWS_AS(cca_ssg_loss(DenseMatrix::from_rows({{1, 2}}), DenseMatrix::from_rows({{1, 2}}), 0.1),
                  ValidationError);
}

TEST_CASE("spectral contrastive loss") {
  CHECK(spectral_contrastive_loss(DenseMatrix(3, 2), DenseMatrix(3, 2)) == 0.0);
  auto one = DenseMatrix::from_rows({{1}});
  CHECK(spectral_contrastive_loss(one, one) == -1.0);
  auto eye = DenseMatrix::identity(2);
  CHECK(spectral_contrastive_loss(eye, eye) == doctest::Approx(-1.5));
  Rng rng = make_rng(6);
  auto a = DenseMatrix::random_normal(9, 4, 1.0, rng);
  auto b = DenseMatrix::random_normal(9, 4, 1.0, rng);
  oracle::Mat ea = oracle::to_eigen(a);
  oracle::Mat eb = oracle::to_eigen(b);
  const double ref = -2.0 / 9.0 * (ea.cwiseProduct(eb)).sum() + (ea * eb.transpose()).squaredNorm() / 81.0;
  CHECK(spectral_contrastive_loss(a, b) == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("positive pair distance loss") {
  std::vector<NodePair> one{{0, 1}};
  CHECK(positive_pair_distance_loss(DenseMatrix(3, 2, 1.5), one) == 0.0);
  CHECK(positive_pair_distance_loss(DenseMatrix::from_rows({{0, 0}, {3, 4}}), one) == 5.0);
  CHECK(positive_pair_distance_loss(DenseMatrix(2, 2), {}) == 0.0);
  Rng rng = make_rng(7);
  auto f = DenseMatrix::random_normal(6, 3, 1.0, rng);
  std::vector<NodePair> pairs{{0, 1}, {2, 5}, {3, 4}, {1, 5}};
  oracle::Mat ef = oracle::to_eigen(f);
  double ref = 0.0;
  for (auto [u, v] : pairs) ref += (ef.row(u) - ef.row(v)).norm();
  CHECK(positive_pair_distance_loss(f, pairs) == doctest::Approx(ref / 4.0).epsilon(1e-14));
}

TEST_CASE("loss gradients match finite differences") {
  for (auto kind : gradcheck::all_losses()) {
    for (auto arch : {Arch::linear, Arch::mlp2}) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto in = gradcheck::make_instance(kind, arch, 1000 * seed + 17);
        INFO(gradcheck::name(kind), " ", to_string(arch), " seed ", seed);
        CHECK(gradcheck::max_relative_error(in) <= 1e-5);
      }
    }
  }
}

TEST_CASE("raw loss gradients match finite differences") {
  Rng rng = make_rng(8);
  for (int t = 0; t < 20; ++t) {
    auto z1 = DenseMatrix::random_normal(6, 4, 1.0, rng);
    auto z2 = DenseMatrix::random_normal(6, 4, 1.0, rng);
    auto ln = laplacian(negative_graph(6, {.num_permutations = 2}, rng), LaplacianKind::combinatorial);
    auto lp = laplacian(negative_graph(6, {}, rng), LaplacianKind::sym_normalized);

    auto sce = sce_loss(z1, ln, 1.0);
    CHECK(oracle::fd_check(z1, sce.grads[0], [&] { return sce_loss(z1, ln, 1.0).value; }) <= 1e-5);
    auto coles = coles_loss(z1, lp, ln);
    CHECK(oracle::fd_check(z1, coles.grads[0], [&] { return coles_loss(z1, lp, ln).value; }) <= 1e-5);
    auto nce = infonce_loss(z1, z2, 0.5);
    CHECK(oracle::fd_check(z1, nce.grads[0], [&] { return infonce_loss(z1, z2, 0.5).value; }) <= 1e-5);
    CHECK(oracle::fd_check(z2, nce.grads[1], [&] { return infonce_loss(z1, z2, 0.5).value; }) <= 1e-5);
    auto cca = cca_ssg_loss(z1, z2, 0.01);
    CHECK(oracle::fd_check(z1, cca.grads[0], [&] { return cca_ssg_loss(z1, z2, 0.01).value; }) <= 1e-5);
    CHECK(oracle::fd_check(z2, cca.grads[1], [&] { return cca_ssg_loss(z1, z2, 0.01).value; }) <= 1e-5);
  }
}
