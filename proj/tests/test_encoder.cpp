#include <doctest.h>

#include "gradcheck.hpp"
#include "oracle.hpp"
#include "structcomp/data.hpp"
#include "structcomp/encoder.hpp"
#include "structcomp/error.hpp"

using namespace structcomp;

namespace {

EncoderParams mlp(DenseMatrix w1, DenseMatrix w2, Activation s1 = Activation::relu, Activation s2 = Activation::relu) {
  EncoderParams p;
  p.arch = Arch::mlp2;
  p.weights = {std::move(w1), std::move(w2)};
  p.activations = {s1, s2};
  return p;
}

EncoderParams linear(DenseMatrix w) {
  EncoderParams p;
  p.arch = Arch::linear;
  p.weights = {std::move(w)};
  return p;
}

}  // namespace

TEST_CASE("mlp forward") {
  auto x = DenseMatrix::from_rows({{-1, 2}});
  auto p = mlp(DenseMatrix::identity(2), DenseMatrix::identity(2));
  CHECK(mlp_forward(x, p).first == DenseMatrix::from_rows({{0, 2}}));
  CHECK(mlp_forward(DenseMatrix(3, 2), p).first == DenseMatrix(3, 2));

  Rng rng = make_rng(1);
  auto w1 = DenseMatrix::random_normal(2, 3, 1.0, rng);
  auto w2 = DenseMatrix::random_normal(3, 2, 1.0, rng);
  auto id = mlp(w1, w2, Activation::identity, Activation::identity);
  CHECK(mlp_forward(x, id).first == matmul(matmul(x, w1), w2));
}

TEST_CASE("linear forward") {
  Rng rng = make_rng(2);
  auto x = DenseMatrix::random_normal(6, 4, 1.0, rng);
  CHECK(linear_forward(x, linear(DenseMatrix::identity(4))).first == x);
  CHECK(linear_forward(x, linear(DenseMatrix::identity(4) * 2.0)).first == x * 2.0);
  auto w = DenseMatrix::random_normal(4, 3, 1.0, rng);
  oracle::Mat ref = oracle::to_eigen(x) * oracle::to_eigen(w);
  CHECK((oracle::to_eigen(linear_forward(x, linear(w)).first) - ref).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(linear_forward(DenseMatrix(6, 5), linear(w)), ValidationError);
}

TEST_CASE("gcn forward") {
  Rng rng = make_rng(3);
  auto x = DenseMatrix::random_normal(5, 4, 1.0, rng);
  auto params = init_params(Arch::mlp2, 4, 6, 3, rng);
  auto edgeless = normalized_adjacency(SparseGraph(5));
  CHECK(max_abs_diff(gcn_forward(edgeless, x, params), mlp_forward(x, params).first) == 0.0);

  std::vector<std::pair<NodeId, NodeId>> e{{0, 1}};
  auto a = normalized_adjacency(build_graph(e, 2));
  auto out = gcn_forward(a, DenseMatrix::from_rows({{1}, {3}}), linear(DenseMatrix::from_rows({{1}})));
  CHECK(max_abs_diff(out, DenseMatrix::from_rows({{2}, {2}})) < 1e-15);

  auto zero = params;
  for (auto& w : zero.weights) w.fill(0.0);
  CHECK(gcn_forward(edgeless, x, zero) == DenseMatrix(5, 3));
}

TEST_CASE("gcn forward matches the dense oracle") {
  Rng rng = make_rng(4);
  auto g = gen_er(30, 0.15, 1);
  auto x = DenseMatrix::random_normal(30, 6, 1.0, rng);
  auto params = init_params(Arch::mlp2, 6, 8, 4, rng);
  oracle::Mat a = oracle::normalized_adjacency(oracle::to_eigen(g));
  oracle::Mat ref = oracle::relu(a * oracle::relu(a * oracle::to_eigen(x) * oracle::to_eigen(params.weights[0])) *
                                 oracle::to_eigen(params.weights[1]));
  CHECK((oracle::to_eigen(gcn_forward(normalized_adjacency(g), x, params)) - ref).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("encoder backward") {
  Rng rng = make_rng(5);
  auto x = DenseMatrix::random_normal(7, 4, 1.0, rng);
  auto params = init_params(Arch::mlp2, 4, 5, 3, rng);
  auto [z, tape] = mlp_forward(x, params);
  for (const auto& g : encoder_backward(tape, params, DenseMatrix(7, 3))) CHECK(g == DenseMatrix(g.rows(), g.cols()));

  auto lin = linear(DenseMatrix::random_normal(4, 3, 1.0, rng));
  auto [zl, tl] = linear_forward(x, lin);
  auto gz = DenseMatrix::random_normal(7, 3, 1.0, rng);
  CHECK(encoder_backward(tl, lin, gz)[0] == matmul_tn(x, gz));
  CHECK_THROWS_AS(encoder_backward(tl, lin, DenseMatrix(7, 2)), ValidationError);
}

TEST_CASE("encoder backward matches finite differences") {
  // Scalar objective ⟨C, Z⟩ for a fixed random C, so ∂/∂Z = C.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed);
    auto x = DenseMatrix::random_normal(8, 6, 1.0, rng);
    auto params = init_params(Arch::mlp2, 6, 7, 4, rng);
    auto c = DenseMatrix::random_normal(8, 4, 1.0, rng);
    auto [z, tape] = mlp_forward(x, params);
    auto grads = encoder_backward(tape, params, c);
    for (std::size_t k = 0; k < 2; ++k) {
      double err = oracle::fd_check(params.weights[k], grads[k], [&] { return inner(mlp_forward(x, params).first, c); });
      CHECK(err <= 1e-5);
    }
  }
}

TEST_CASE("gcn backward matches finite differences") {
  auto g = gen_er(10, 0.3, 2);
  auto a = normalized_adjacency(g);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = make_rng(seed);
    auto x = DenseMatrix::random_normal(10, 5, 1.0, rng);
    auto params = init_params(Arch::mlp2, 5, 6, 3, rng);
    auto c = DenseMatrix::random_normal(10, 3, 1.0, rng);
    auto [z, tape] = gcn_forward_tape(a, x, params);
    auto grads = encoder_backward(tape, params, c);
    for (std::size_t k = 0; k < 2; ++k) {
      double err = oracle::fd_check(params.weights[k], grads[k], [&] { return inner(gcn_forward(a, x, params), c); });
      CHECK(err <= 1e-5);
    }
  }
}

TEST_CASE("init params") {
  Rng rng = make_rng(7);
  auto p = init_params(Arch::mlp2, 10, 20, 5, rng);
  CHECK(p.weights.size() == 2);
  CHECK(p.input_dim() == 10);
  CHECK(p.output_dim() == 5);
  const double bound = std::sqrt(6.0 / 30.0);
  CHECK(max_abs(p.weights[0]) <= bound);
  auto l = init_params(Arch::linear, 10, 20, 5, rng);
  CHECK(l.weights.size() == 1);
  CHECK(l.weights[0].rows() == 10);
  Rng a = make_rng(1);
  Rng b = make_rng(1);
  CHECK(init_params(Arch::mlp2, 3, 4, 2, a) == init_params(Arch::mlp2, 3, 4, 2, b));
}

TEST_CASE("enum names round-trip") {
  for (auto a : {Arch::linear, Arch::mlp2}) CHECK(arch_from_string(to_string(a)) == a);
  for (auto s : {Activation::relu, Activation::identity}) CHECK(activation_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(arch_from_string("gat"), ValidationError);
}
