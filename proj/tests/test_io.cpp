#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "structcomp/error.hpp"
#include "structcomp/io.hpp"
#include "structcomp/rng.hpp"
#include "structcomp/training.hpp"

using namespace structcomp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "structcomp_test_io";
  fs::create_directories(dir);
  fs::path p = dir / name;
  fs::remove(p);
  return p;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("matrix round-trip") {
  Rng rng = make_rng(1);
  auto m = DenseMatrix::random_normal(7, 3, 1.0, rng);
  auto p = scratch("m.bin");
  write_matrix(p, m);
  CHECK(read_matrix(p) == m);

  auto csv = scratch("m.csv");
  write_matrix(csv, m);
  CHECK(read_matrix(csv) == m);

  write_text_atomic(csv, "1,2\n3,4\n");
  CHECK(read_matrix(csv) == DenseMatrix::from_rows({{1, 2}, {3, 4}}));
  write_text_atomic(csv, "1,2\n3\n");
  CHECK_THROWS_AS(read_matrix(csv), DataError);
}

TEST_CASE("matrix file validation") {
  Rng rng = make_rng(2);
  auto p = scratch("t.bin");
  write_matrix(p, DenseMatrix::random_normal(4, 4, 1.0, rng));
  auto bytes = read_text(p);
  write_text_atomic(p, bytes.substr(0, bytes.size() - 8));
  auto msg = error_of([&] { read_matrix(p); });
  CHECK(msg.find("truncated") != std::string::npos);
  CHECK(msg.find("expected at least 152 bytes, file has 144") != std::string::npos);

  write_text_atomic(p, "XXXX" + bytes.substr(4));
  msg = error_of([&] { read_matrix(p); });
  CHECK(msg.find("t.bin") != std::string::npos);
  CHECK(msg.find("SCMF") != std::string::npos);

  write_text_atomic(p, bytes + "x");
  CHECK(error_of([&] { read_matrix(p); }).find("trailing data") != std::string::npos);
  CHECK_THROWS_AS(read_matrix(scratch("absent.bin")), DataError);
}

TEST_CASE("edge lists and graphs") {
  auto p = scratch("edges.tsv");
  write_text_atomic(p, "# comment\n0\t1\n1 2\n2\t0\n");
  auto g = read_graph(p);
  CHECK(g.num_nodes() == 3);
  CHECK(g.num_edges() == 3);
  CHECK(read_graph(p, 5).num_nodes() == 5);
  CHECK_THROWS_AS(read_graph(p, 2), Error);

  auto out = scratch("edges_out.tsv");
  write_edge_list(out, g);
  CHECK(read_graph(out) == g);

  write_text_atomic(p, "0 1 2\n");
  CHECK_THROWS_AS(read_edge_list(p), DataError);
  write_text_atomic(p, "0 x\n");
  CHECK_THROWS_AS(read_edge_list(p), DataError);
}

TEST_CASE("labels and partitions") {
  auto l = scratch("labels.txt");
  write_labels(l, {2, 0, 1});
  CHECK(read_labels(l) == std::vector<int>{2, 0, 1});
  write_text_atomic(l, "0\n-1\n");
  CHECK_THROWS_AS(read_labels(l), DataError);

  auto p = scratch("partition.txt");
  Partition part({1, 0, 1, 2}, 3);
  write_partition(p, part);
  CHECK(read_partition(p) == part);
  write_text_atomic(p, "0\n2\n");
  CHECK_THROWS_AS(read_partition(p), DataError);
}

TEST_CASE("params round-trip") {
  Rng rng = make_rng(3);
  auto params = init_params(Arch::mlp2, 5, 7, 3, rng, {Activation::relu, Activation::identity});
  auto p = scratch("params.bin");
  write_params(p, params, {.seed = 9, .loss = "grace"});
  CHECK(read_params(p) == params);
  CHECK(fs::exists(p.string() + ".json"));
  CHECK(read_text(p.string() + ".json").find("\"grace\"") != std::string::npos);

  auto bytes = read_text(p);
  write_text_atomic(p, "SCMF" + bytes.substr(4));
  CHECK(error_of([&] { read_params(p); }).find("SCMP") != std::string::npos);
}

TEST_CASE("results tables") {
  ResultTable t;
  t.columns = {"rate", "n_clusters", "accuracy", "seed"};
  for (int i = 0; i < 6; ++i) t.add_row({0.1 * i, std::int64_t{i}, 0.5, std::int64_t{7}});
  auto j = scratch("r.json");
  write_results(j, t);
  auto text = read_text(j);
  CHECK(std::count(text.begin(), text.end(), '{') == 6);
  CHECK(text.find("\"n_clusters\"") != std::string::npos);

  auto again = scratch("r2.json");
  write_results(again, t);
  CHECK(read_text(again) == text);

  ResultTable empty;
  empty.columns = {"a", "b"};
  auto ej = scratch("e.json");
  write_results(ej, empty);
  CHECK(read_text(ej).find("[]") != std::string::npos);
  auto ec = scratch("e.csv");
  write_results(ec, empty);
  CHECK(read_text(ec) == "a,b\n");

  CHECK_THROWS_AS(t.add_row({1.0}), ValidationError);
}

TEST_CASE("doubles keep full precision") {
  ResultTable t;
  t.columns = {"x"};
  t.add_row({0.1 + 0.2});
  auto c = scratch("p.csv");
  write_results(c, t);
  CHECK(read_text(c) == "x\n0.30000000000000004\n");
}

TEST_CASE("config json") {
  TrainConfig cfg;
  cfg.model = Model::cca_ssg;
  cfg.lr = 0.005;
  cfg.activations = {Activation::relu, Activation::identity};
  cfg.arch = Arch::mlp2;
  cfg.n_clusters = 80;
  auto back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(back.model == Model::cca_ssg);
  CHECK(back.activations[1] == Activation::identity);
  CHECK_THROWS_AS(config_from_json("{\"bogus\": 1}"), DataError);
  CHECK_THROWS_AS(config_from_json("[1]"), DataError);
  auto partial = config_from_json("{\"epochs\": 7}");
  CHECK(partial.epochs == 7);
  CHECK(partial.lr == TrainConfig{}.lr);
}

TEST_CASE("sha256 and manifest digest") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  RunManifest a;
  a.command = "train";
  a.seed = 1;
  a.started_at = "t0";
  RunManifest b = a;
  b.started_at = "t1";
  b.finished_at = "t2";
  CHECK(a.digest() == b.digest());
  b.seed = 2;
  CHECK(a.digest() != b.digest());
}

TEST_CASE("atomic writes leave no temporaries") {
  auto p = scratch("atomic.txt");
  write_text_atomic(p, "hello");
  CHECK(read_text(p) == "hello");
  for (const auto& e : fs::directory_iterator(p.parent_path()))
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
  CHECK_THROWS_AS(write_text_atomic(p.parent_path() / "no_such_dir" / "x", "y"), DataError);
}
