#include "structcomp/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "structcomp/error.hpp"
#include "structcomp/io.hpp"
#include "json.hpp"

namespace structcomp {

SparseGraph gen_er(Index n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("gen_er: p must lie in [0, 1]");
  if (n < 0) throw ValidationError("gen_er: n must be >= 0");
  Rng rng = make_rng(seed, Stream::data);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (uniform01(rng) < p) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
  return build_graph(edges, n);
}

LabeledDataset gen_sbm(const SbmOptions& o) {
  if (o.blocks < 1 || o.n % o.blocks != 0) {
    throw ValidationError("gen_sbm: blocks=" + std::to_string(o.blocks) + " must divide n=" + std::to_string(o.n));
  }
  if (!(o.p_in >= 0.0 && o.p_in <= 1.0 && o.p_out >= 0.0 && o.p_out <= 1.0))
    throw ValidationError("gen_sbm: p_in and p_out must lie in [0, 1]");
  if (o.feature_dim < o.blocks) throw ValidationError("gen_sbm: feature_dim must be >= blocks");
  if (!(o.noise_std >= 0.0)) throw ValidationError("gen_sbm: noise_std must be >= 0");

  Rng rng = make_rng(o.seed, Stream::data);
  LabeledDataset d;
  d.num_classes = o.blocks;
  d.labels.resize(static_cast<std::size_t>(o.n));
  for (Index i = 0; i < o.n; ++i) d.labels[static_cast<std::size_t>(i)] = static_cast<int>(i / (o.n / o.blocks));
  std::shuffle(d.labels.begin(), d.labels.end(), rng);

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (Index i = 0; i < o.n; ++i) {
    for (Index j = i + 1; j < o.n; ++j) {
      const double p = d.labels[static_cast<std::size_t>(i)] == d.labels[static_cast<std::size_t>(j)] ? o.p_in : o.p_out;
      if (uniform01(rng) < p) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  d.graph = build_graph(edges, o.n);

  // Means (sep/√2)·e_b are pairwise sep apart.
  const double scale = o.feature_sep / std::sqrt(2.0);
  d.features = DenseMatrix::random_normal(o.n, o.feature_dim, o.noise_std, rng);
  for (Index i = 0; i < o.n; ++i) d.features(i, d.labels[static_cast<std::size_t>(i)]) += scale;

  d.split = split_per_class(d.labels, d.num_classes, 20, o.seed);
  return d;
}

Split split_per_class(const std::vector<int>& labels, int num_classes, int per_class, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::probe);
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw ValidationError("split: label " + std::to_string(labels[i]) + " of node " + std::to_string(i) +
                            " outside [0, " + std::to_string(num_classes) + ")");
    }
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<NodeId>(i));
  }
  std::vector<std::uint8_t> is_train(labels.size(), 0);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t take = std::min<std::size_t>(members.size(), static_cast<std::size_t>(per_class));
    for (std::size_t k = 0; k < take; ++k) is_train[static_cast<std::size_t>(members[k])] = 1;
  }
  Split s;
  for (std::size_t i = 0; i < labels.size(); ++i) (is_train[i] ? s.train : s.test).push_back(static_cast<NodeId>(i));
  return s;
}

SparseGraph add_noise_edges(const SparseGraph& g, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0)) throw ValidationError("add_noise_edges: fraction must be >= 0");
  const Index n = g.num_nodes();
  const Index m = g.num_edges() - g.num_self_loops();
  const auto extra = static_cast<Index>(std::llround(fraction * static_cast<double>(m)));
  if (extra == 0) return g;
  const Index capacity = n * (n - 1) / 2 - m;
  if (extra > capacity) {
    throw ValidationError("add_noise_edges: cannot add " + std::to_string(extra) + " edges, only " +
                          std::to_string(capacity) + " node pairs are free");
  }
  Rng rng = make_rng(seed, Stream::data);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::set<std::pair<NodeId, NodeId>> added;
  while (static_cast<Index>(added.size()) < extra) {
    NodeId u = pick(rng);
    NodeId v = pick(rng);
    if (u == v || g.has_edge(u, v)) continue;
    if (u > v) std::swap(u, v);
    added.emplace(u, v);
  }
  std::vector<WeightedEdge> edges;
  for (Index i = 0; i < n; ++i) {
    auto nb = g.neighbors(i);
    auto wt = g.weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k)
      if (nb[k] >= i) edges.push_back({static_cast<NodeId>(i), nb[k], wt[k]});
  }
  for (const auto& [u, v] : added) edges.push_back({u, v, 1.0});
  return build_weighted_graph(edges, n, {.keep_self_loops = true});
}

ProbeResult linear_probe(const DenseMatrix& z, const std::vector<int>& labels, const Split& split,
                         const ProbeOptions& opts) {
  if (static_cast<Index>(labels.size()) != z.rows()) {
    throw ValidationError("linear_probe: " + std::to_string(labels.size()) + " labels for " + std::to_string(z.rows()) +
                          " embedding rows");
  }
  if (split.train.empty() || split.test.empty()) throw ValidationError("linear_probe: empty train or test split");
  if (!z.all_finite()) throw NumericalError("linear_probe: non-finite embeddings");
  const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
  const Index d = z.cols();
  const auto nt = static_cast<Index>(split.train.size());

  // Standardize with train statistics.
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  std::vector<double> inv_sd(static_cast<std::size_t>(d), 0.0);
  for (Index j = 0; j < d; ++j) {
    double s = 0.0;
    for (NodeId i : split.train) s += z(i, j);
    const double mu = s / static_cast<double>(nt);
    double v = 0.0;
    for (NodeId i : split.train) v += (z(i, j) - mu) * (z(i, j) - mu);
    const double sd = std::sqrt(v / static_cast<double>(nt));
    mean[static_cast<std::size_t>(j)] = mu;
    inv_sd[static_cast<std::size_t>(j)] = sd > 1e-12 * (1.0 + std::abs(mu)) ? 1.0 / sd : 0.0;
  }
  auto features = [&](const std::vector<NodeId>& rows) {
    DenseMatrix f(static_cast<Index>(rows.size()), d);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (Index j = 0; j < d; ++j)
        f(static_cast<Index>(r), j) = (z(rows[r], j) - mean[static_cast<std::size_t>(j)]) * inv_sd[static_cast<std::size_t>(j)];
    return f;
  };
  const DenseMatrix xt = features(split.train);
  const DenseMatrix xs = features(split.test);

  ProbeResult res;
  res.params.weight = DenseMatrix(d, classes);
  res.params.bias.assign(static_cast<std::size_t>(classes), 0.0);
  DenseMatrix& w = res.params.weight;
  auto& b = res.params.bias;

  auto logits = [&](const DenseMatrix& x) {
    DenseMatrix l = matmul(x, w);
    for (Index i = 0; i < l.rows(); ++i)
      for (int c = 0; c < classes; ++c) l(i, c) += b[static_cast<std::size_t>(c)];
    return l;
  };

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    DenseMatrix p = logits(xt);
    for (Index i = 0; i < nt; ++i) {
      auto row = p.row(i);
      const double mx = *std::max_element(row.begin(), row.end());
      double s = 0.0;
      for (double& v : row) s += (v = std::exp(v - mx));
      for (double& v : row) v /= s;
      row[static_cast<std::size_t>(labels[static_cast<std::size_t>(split.train[static_cast<std::size_t>(i)])])] -= 1.0;
    }
    p *= 1.0 / static_cast<double>(nt);
    const DenseMatrix gw = matmul_tn(xt, p);
    w -= gw * opts.lr;
    for (int c = 0; c < classes; ++c) {
      double gb = 0.0;
      for (Index i = 0; i < nt; ++i) gb += p(i, c);
      b[static_cast<std::size_t>(c)] -= opts.lr * gb;
    }
  }

  // Near-ties go to the class with more labeled nodes, then the lower id.
  std::vector<Index> prior(static_cast<std::size_t>(classes), 0);
  for (int l : labels) ++prior[static_cast<std::size_t>(l)];
  const DenseMatrix ls = logits(xs);
  Index correct = 0;
  for (Index i = 0; i < ls.rows(); ++i) {
    int best = 0;
    for (int c = 1; c < classes; ++c) {
      const double a = ls(i, c);
      const double bst = ls(i, best);
      const double tol = 1e-12 * (1.0 + std::abs(a) + std::abs(bst));
      if (a > bst + tol || (std::abs(a - bst) <= tol && prior[static_cast<std::size_t>(c)] > prior[static_cast<std::size_t>(best)]))
        best = c;
    }
    if (best == labels[static_cast<std::size_t>(split.test[static_cast<std::size_t>(i)])]) ++correct;
  }
  res.accuracy = static_cast<double>(correct) / static_cast<double>(ls.rows());
  return res;
}

ProbeResult linear_probe(const DenseMatrix& z, const LabeledDataset& data, const ProbeOptions& opts) {
  return linear_probe(z, data.labels, data.split, opts);
}

namespace {

// Minimum-cost assignment on a square matrix (Hungarian algorithm with
// potentials). Returns col_for_row.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col_for_row(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) col_for_row[p[j] - 1] = j - 1;
  return col_for_row;
}

}  // namespace

double cluster_agreement(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ValidationError("cluster_agreement: labelings differ in length");
  if (a.empty()) return 1.0;
  const int ka = *std::max_element(a.begin(), a.end()) + 1;
  const int kb = *std::max_element(b.begin(), b.end()) + 1;
  if (*std::min_element(a.begin(), a.end()) < 0 || *std::min_element(b.begin(), b.end()) < 0)
    throw ValidationError("cluster_agreement: negative label");
  const int k = std::max(ka, kb);
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) cost[a[i]][b[i]] -= 1.0;
  const std::vector<int> match = hungarian(cost);
  double agree = 0.0;
  for (int r = 0; r < k; ++r) agree -= cost[r][match[r]];
  return agree / static_cast<double>(a.size());
}

LabeledDataset load_dataset(const std::filesystem::path& dir, std::uint64_t split_seed) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("dataset: " + dir.string() + " is not a directory");
  LabeledDataset d;
  const fs::path bin = dir / "features.bin";
  const fs::path csv = dir / "features.csv";
  if (fs::exists(bin)) {
    d.features = read_matrix(bin);
  } else if (fs::exists(csv)) {
    d.features = read_matrix(csv);
  } else {
    throw DataError("dataset: " + dir.string() + " has neither features.bin nor features.csv");
  }
  const Index n = d.features.rows();
  d.graph = read_graph(dir / "edges.tsv", n);
  d.labels = read_labels(dir / "labels.txt");
  if (static_cast<Index>(d.labels.size()) != n) {
    throw DataError("dataset: labels.txt has " + std::to_string(d.labels.size()) + " labels but features have " +
                    std::to_string(n) + " rows");
  }
  d.num_classes = d.labels.empty() ? 0 : *std::max_element(d.labels.begin(), d.labels.end()) + 1;

  const fs::path split_path = dir / "split.json";
  if (fs::exists(split_path)) {
    std::ifstream in(split_path);
    nlohmann::json j;
    try {
      in >> j;
      d.split.train = j.at("train").get<std::vector<NodeId>>();
      d.split.test = j.at("test").get<std::vector<NodeId>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("dataset: " + split_path.string() + ": " + e.what());
    }
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
    for (const auto* part : {&d.split.train, &d.split.test}) {
      for (NodeId i : *part) {
        if (i < 0 || i >= n) throw DataError("dataset: split.json references node " + std::to_string(i) + " >= n");
        if (seen[static_cast<std::size_t>(i)]++) throw DataError("dataset: split.json lists node " + std::to_string(i) + " twice");
      }
    }
  } else {
    d.split = split_per_class(d.labels, d.num_classes, 20, split_seed);
  }
  return d;
}

void save_dataset(const std::filesystem::path& dir, const LabeledDataset& data) {
  std::filesystem::create_directories(dir);
  write_edge_list(dir / "edges.tsv", data.graph);
  write_matrix(dir / "features.bin", data.features);
  write_labels(dir / "labels.txt", data.labels);
  nlohmann::ordered_json j;
  j["train"] = data.split.train;
  j["test"] = data.split.test;
  write_text_atomic(dir / "split.json", j.dump() + "\n");
}

}  // namespace structcomp
