#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "structcomp/cli.hpp"
#include "structcomp/io.hpp"

using namespace structcomp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "structcomp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "structcomp_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST_CASE("theory appc writes a report") {
  auto r = cli({"theory", "--check", "appc", "--out", at("appc.json")});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(read_text(at("appc.json")));
  CHECK(j["check"] == "appc");
  CHECK(j["passed"] == true);
}

TEST_CASE("theory t1 reports every bound field") {
  auto r = cli({"theory", "--check", "t1", "--trials", "3", "--seed", "5", "--out", at("t1.json")});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(read_text(at("t1.json")));
  REQUIRE(j["trials"].size() == 3);
  for (const char* key : {"lhs", "rhs", "slack", "holds", "n", "p", "n_clusters", "seed", "loss_graph",
                          "loss_compressed", "remainder_norm", "feature_bound", "weight_norm"})
    CHECK(j["trials"][0].contains(key));
}

TEST_CASE("usage errors exit 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"theory", "--check", "t9"}).code == 1);
  auto r = cli({"train", "--features", at("x.bin"), "--out", at("p.bin")});
  CHECK(r.code == 1);
  CHECK(r.err.find("--graph") != std::string::npos);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("corrupt features exit 2 naming the file and magic") {
  REQUIRE(cli({"gen", "--n", "40", "--out", at("tiny")}).code == 0);
  write_text_atomic(at("bad.bin"), "JUNKJUNKJUNKJUNKJUNK");
  auto r = cli({"train", "--graph", at("tiny/edges.tsv"), "--features", at("bad.bin"), "--out", at("p.bin")});
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.bin") != std::string::npos);
  CHECK(r.err.find("SCMF") != std::string::npos);
}

TEST_CASE("end-to-end pipeline") {
  REQUIRE(cli({"gen", "--n", "200", "--seed", "3", "--out", at("sbm")}).code == 0);
  const auto ds = at("sbm");
  CHECK(fs::exists(ds + "/edges.tsv"));
  CHECK(fs::exists(ds + "/features.bin"));
  CHECK(fs::exists(ds + "/labels.txt"));

  auto p = cli({"partition", "--graph", ds + "/edges.tsv", "--clusters", "20", "--out", at("part.txt")});
  CHECK(p.code == 0);
  CHECK(read_partition(at("part.txt")).num_clusters() == 20);

  auto c = cli({"compress", "--dataset", ds, "--partition", at("part.txt"), "--out-xc", at("xc.bin"), "--out-ac",
                at("ac.bin")});
  CHECK(c.code == 0);
  CHECK(read_matrix(at("xc.bin")).rows() == 20);
  CHECK(read_matrix(at("ac.bin")).rows() == 20);

  auto t = cli({"train", "--dataset", ds, "--model", "sce", "--clusters", "20", "--epochs", "20", "--out",
                at("params.bin"), "--history", at("hist.csv")});
  CHECK(t.code == 0);
  CHECK(fs::exists(at("params.bin.json")));
  CHECK(fs::exists(at("params.bin.manifest.json")));

  CHECK(cli({"infer", "--dataset", ds, "--params", at("params.bin"), "--out", at("z.bin")}).code == 0);
  CHECK(read_matrix(at("z.bin")).rows() == 200);
  auto e = cli({"eval", "--dataset", ds, "--embeddings", at("z.bin"), "--out", at("eval.json")});
  CHECK(e.code == 0);
  auto j = nlohmann::json::parse(read_text(at("eval.json")));
  CHECK(j[0].contains("accuracy"));
}

TEST_CASE("sweep writes one row per rate") {
  auto r = cli({"sweep", "--dataset", at("sbm"), "--model", "sce", "--epochs", "5", "--out", at("sweep.json")});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(read_text(at("sweep.json")));
  CHECK(j.size() == 6);
  for (const char* key : {"rate", "n_clusters", "accuracy", "seed"}) CHECK(j[0].contains(key));
}

TEST_CASE("compare-full table") {
  auto r = cli({"compare-full", "--dataset", at("sbm"), "--model", "coles", "--clusters", "20", "--epochs", "6",
                "--out", at("cmp.csv"), "--summary", at("cmp_summary.json")});
  CHECK(r.code == 0);
  auto text = read_text(at("cmp.csv"));
  CHECK(text.rfind("epoch,structcomp_loss,full_loss_at_structcomp,full_train_loss,full_loss_at_full\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 8);
  auto s = nlohmann::json::parse(read_text(at("cmp_summary.json")));
  CHECK(s[0].contains("spearman"));
  CHECK(s[0].contains("relative_decrease"));
}

TEST_CASE("re-runs are byte-identical") {
  std::vector<std::string> base{"train", "--dataset", at("sbm"), "--model", "grace", "--clusters", "20",
                                "--epochs", "3", "--seed", "11"};
  auto a = base;
  a.insert(a.end(), {"--out", at("ga.bin"), "--history", at("ga.json")});
  auto b = base;
  b.insert(b.end(), {"--out", at("gb.bin"), "--history", at("gb.json")});
  REQUIRE(cli(a).code == 0);
  REQUIRE(cli(b).code == 0);
  CHECK(sha256_file(at("ga.bin")) == sha256_file(at("gb.bin")));
  CHECK(read_text(at("ga.json")) == read_text(at("gb.json")));
  auto ma = nlohmann::json::parse(read_text(at("ga.bin.manifest.json")));
  auto mb = nlohmann::json::parse(read_text(at("gb.bin.manifest.json")));
  CHECK(ma["config"] == mb["config"]);
}
