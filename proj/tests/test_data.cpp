#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "structcomp/data.hpp"
#include "structcomp/error.hpp"
#include "structcomp/io.hpp"
#include "structcomp/partition.hpp"

using namespace structcomp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("structcomp_test_data_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("erdos-renyi") {
  CHECK(gen_er(30, 0.0, 1).num_edges() == 0);
  CHECK(gen_er(30, 1.0, 1).num_edges() == 30 * 29 / 2);
  const double mean = 0.05 * 500 * 499 / 2.0;
  const double sd = std::sqrt(mean * 0.95);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(std::abs(static_cast<double>(gen_er(500, 0.05, seed).num_edges()) - mean) <= 4.0 * sd);
  }
  CHECK(gen_er(50, 0.1, 3) == gen_er(50, 0.1, 3));
  CHECK_THROWS_AS(gen_er(10, 1.5, 0), ValidationError);
}

TEST_CASE("block model") {
  auto d = gen_sbm({.n = 400, .blocks = 4, .p_in = 0.1, .p_out = 0.1, .seed = 1});
  double within = 0.0;
  double between = 0.0;
  for (auto [u, v] : d.graph.edge_list()) (d.labels[u] == d.labels[v] ? within : between) += 1.0;
  // Equal probabilities give equal within and between edge densities.
  const double pairs_within = 4 * (100.0 * 99 / 2);
  const double pairs_between = 400.0 * 399 / 2 - pairs_within;
  CHECK(within / pairs_within == doctest::Approx(between / pairs_between).epsilon(0.1));

  auto quiet = gen_sbm({.n = 80, .noise_std = 0.0, .seed = 2});
  for (Index i = 1; i < 80; ++i) {
    for (Index j = 0; j < i; ++j) {
      if (quiet.labels[static_cast<std::size_t>(i)] != quiet.labels[static_cast<std::size_t>(j)]) continue;
      bool same = std::equal(quiet.features.row(i).begin(), quiet.features.row(i).end(), quiet.features.row(j).begin());
      CHECK(same);
    }
  }
  CHECK(quiet.num_classes == 4);
  CHECK_THROWS_AS(gen_sbm({.n = 10, .blocks = 4}), ValidationError);
}

TEST_CASE("partitioner recovers the blocks") {
  auto d = gen_sbm({.seed = 0});
  auto r = multilevel_partition(d.graph, 4, {.seed = 0});
  std::vector<int> found(r.partition.assign().begin(), r.partition.assign().end());
  CHECK(cluster_agreement(found, d.labels) >= 0.95);
}

TEST_CASE("cluster agreement") {
  CHECK(cluster_agreement({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
  CHECK(cluster_agreement({0, 0, 1, 1}, {0, 1, 0, 1}) == 0.5);
  CHECK(cluster_agreement({0, 1, 2, 2}, {2, 0, 1, 1}) == 1.0);
  CHECK_THROWS_AS(cluster_agreement({0}, {0, 1}), ValidationError);
}

TEST_CASE("per-class split") {
  auto d = gen_sbm({.seed = 3});
  auto s = split_per_class(d.labels, 4, 20, 7);
  CHECK(s.train.size() == 80);
  std::set<NodeId> train(s.train.begin(), s.train.end());
  std::set<NodeId> test(s.test.begin(), s.test.end());
  CHECK(train.size() == 80);
  CHECK(train.size() + test.size() == 800);
  for (NodeId t : s.test) CHECK_FALSE(train.count(t));
  std::vector<int> per(4, 0);
  for (NodeId t : s.train) ++per[static_cast<std::size_t>(d.labels[static_cast<std::size_t>(t)])];
  CHECK(per == std::vector<int>(4, 20));
  CHECK(split_per_class(d.labels, 4, 20, 7).train == s.train);

  auto small = split_per_class({0, 0, 1, 1, 1}, 2, 20, 1);
  CHECK(small.train.size() == 5);
  CHECK(small.test.empty());
}

TEST_CASE("noise edges") {
  auto g = gen_er(60, 0.06, 4);
  CHECK(add_noise_edges(g, 0.0, 1) == g);
  std::vector<std::pair<NodeId, NodeId>> cycle;
  for (NodeId i = 0; i < 100; ++i) cycle.push_back({i, static_cast<NodeId>((i + 1) % 100)});
  auto c = build_graph(cycle, 100);
  auto noisy = add_noise_edges(c, 0.1, 5);
  CHECK(noisy.num_edges() == 110);
  for (auto [u, v] : c.edge_list()) CHECK(noisy.has_edge(u, v));
  Index fresh = 0;
  for (auto [u, v] : noisy.edge_list()) fresh += c.has_edge(u, v) ? 0 : 1;
  CHECK(fresh == 10);
}

TEST_CASE("linear probe") {
  DenseMatrix z(40, 1);
  std::vector<int> labels(40);
  Split split;
  for (int i = 0; i < 40; ++i) {
    labels[static_cast<std::size_t>(i)] = i % 2;
    z(i, 0) = i % 2 == 0 ? -1.0 - 0.01 * i : 1.0 + 0.01 * i;
    (i < 10 ? split.train : split.test).push_back(i);
  }
  CHECK(linear_probe(z, labels, split).accuracy == 1.0);

  // Constant embeddings predict one class for everyone.
  DenseMatrix flat(40, 3, 0.5);
  std::vector<int> skew(40, 0);
  for (int i = 30; i < 40; ++i) skew[static_cast<std::size_t>(i)] = 1;
  for (int i = 0; i < 4; ++i) skew[static_cast<std::size_t>(i)] = 1;
  Split sk{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {}};
  for (NodeId i = 11; i < 40; ++i) sk.test.push_back(i);
  CHECK(linear_probe(flat, skew, sk).accuracy == doctest::Approx(19.0 / 29.0));
}

TEST_CASE("linear probe on shuffled labels is at chance") {
  auto d = gen_sbm({.seed = 4});
  std::vector<double> acc;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto labels = d.labels;
    Rng rng = make_rng(seed);
    std::shuffle(labels.begin(), labels.end(), rng);
    auto split = split_per_class(labels, 4, 20, seed);
    acc.push_back(linear_probe(d.features, labels, split, {.seed = seed}).accuracy);
  }
  double mean = 0.0;
  for (double a : acc) mean += a / static_cast<double>(acc.size());
  const double sd = std::sqrt(0.25 * 0.75 / 720.0 / 10.0);
  CHECK(std::abs(mean - 0.25) <= 4.0 * sd + 0.02);
}

TEST_CASE("dataset round-trip") {
  auto d = gen_sbm({.n = 120, .seed = 5});
  auto dir = scratch("roundtrip");
  save_dataset(dir, d);
  auto back = load_dataset(dir);
  CHECK(back.graph == d.graph);
  CHECK(back.features == d.features);
  CHECK(back.labels == d.labels);
  CHECK(back.split.train == d.split.train);
  CHECK(back.num_classes == d.num_classes);

  fs::remove(dir / "split.json");
  auto seeded = load_dataset(dir, 3);
  CHECK(seeded.split.train.size() == 80);
}

TEST_CASE("dataset validation") {
  auto d = gen_sbm({.n = 40, .seed = 6});
  auto dir = scratch("bad_edge");
  save_dataset(dir, d);
  {
    std::ofstream f(dir / "edges.tsv", std::ios::app);
    f << "0\t40\n";
  }
  CHECK_THROWS_AS(load_dataset(dir), Error);

  auto dir2 = scratch("bad_rows");
  save_dataset(dir2, d);
  write_matrix(dir2 / "features.bin", DenseMatrix(39, 32));
  CHECK_THROWS_AS(load_dataset(dir2), DataError);

  CHECK_THROWS_AS(load_dataset(scratch("missing") / "nope"), DataError);
}
