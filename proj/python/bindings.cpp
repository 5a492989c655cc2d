#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "structcomp/compress.hpp"
#include "structcomp/data.hpp"
#include "structcomp/error.hpp"
#include "structcomp/io.hpp"
#include "structcomp/partition.hpp"
#include "structcomp/theory.hpp"
#include "structcomp/training.hpp"

namespace py = pybind11;
using namespace structcomp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

DenseMatrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ValidationError("expected a 2-d array, got " + std::to_string(a.ndim()) + " dimensions");
  const auto rows = static_cast<Index>(a.shape(0));
  const auto cols = static_cast<Index>(a.shape(1));
  return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const DenseMatrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

SparseGraph to_graph(const IntArray& edges, Index n) {
  if (edges.ndim() != 2 || (edges.shape(0) > 0 && edges.shape(1) != 2))
    throw ValidationError("edges must have shape (m, 2)");
  std::vector<std::pair<NodeId, NodeId>> e;
  auto r = edges.unchecked<2>();
  for (py::ssize_t k = 0; k < edges.shape(0); ++k)
    e.emplace_back(static_cast<NodeId>(r(k, 0)), static_cast<NodeId>(r(k, 1)));
  return build_graph(e, n);
}

IntArray edge_array(const SparseGraph& g) {
  auto list = g.edge_list();
  IntArray out({static_cast<py::ssize_t>(list.size()), py::ssize_t{2}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < list.size(); ++k) {
    w(k, 0) = list[k].first;
    w(k, 1) = list[k].second;
  }
  return out;
}

Partition to_partition(const IntArray& assign, Index n_clusters) {
  std::vector<ClusterId> a(assign.data(), assign.data() + assign.size());
  return Partition(std::move(a), static_cast<ClusterId>(n_clusters));
}

IntArray assign_array(const Partition& p) {
  IntArray out(static_cast<py::ssize_t>(p.num_nodes()));
  std::copy(p.assign().begin(), p.assign().end(), out.mutable_data());
  return out;
}

std::vector<NodeId> to_ids(const IntArray& a) { return {a.data(), a.data() + a.size()}; }

EncoderParams to_params(const std::vector<Array>& weights, const std::string& arch,
                        const std::pair<std::string, std::string>& activations) {
  EncoderParams p;
  p.arch = arch_from_string(arch);
  for (const auto& w : weights) p.weights.push_back(to_matrix(w));
  p.activations = {activation_from_string(activations.first), activation_from_string(activations.second)};
  p.validate();
  return p;
}

py::dict train_impl(const IntArray& edges, const Array& x, const std::string& config_json, bool full_graph) {
  const DenseMatrix features = to_matrix(x);
  const SparseGraph g = to_graph(edges, features.rows());
  const TrainConfig cfg = config_from_json(config_json);
  TrainResult r;
  {
    py::gil_scoped_release release;
    r = full_graph ? full_graph_train(g, features, cfg) : train(g, features, cfg);
  }
  py::list weights;
  for (const auto& w : r.params.weights) weights.append(to_array(w));
  py::dict out;
  out["weights"] = weights;
  out["arch"] = to_string(r.params.arch);
  out["activations"] = py::make_tuple(to_string(r.params.activations[0]), to_string(r.params.activations[1]));
  out["loss"] = r.history.loss;
  out["partition"] = assign_array(r.partition);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Structural compression for scalable graph contrastive learning";

  // translators run newest first, so the base class goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ArithmeticError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<DataError>(m, "DataError", PyExc_IOError);

  m.def(
      "gen_sbm",
      [](Index n, int blocks, double p_in, double p_out, Index feature_dim, double feature_sep, double noise_std,
         std::uint64_t seed) {
        auto d = gen_sbm({n, blocks, p_in, p_out, feature_dim, feature_sep, noise_std, seed});
        py::dict out;
        out["edges"] = edge_array(d.graph);
        out["features"] = to_array(d.features);
        out["labels"] = d.labels;
        out["train"] = d.split.train;
        out["test"] = d.split.test;
        return out;
      },
      py::arg("n") = 800, py::arg("blocks") = 4, py::arg("p_in") = 0.1, py::arg("p_out") = 0.01,
      py::arg("feature_dim") = 32, py::arg("feature_sep") = 2.0, py::arg("noise_std") = 1.0, py::arg("seed") = 0);

  m.def(
      "partition",
      [](const IntArray& edges, Index n, Index n_clusters, double balance_eps, std::uint64_t seed) {
        auto r = multilevel_partition(to_graph(edges, n), n_clusters, {.balance_eps = balance_eps, .seed = seed});
        return assign_array(r.partition);
      },
      py::arg("edges"), py::arg("n"), py::arg("n_clusters"), py::arg("balance_eps") = 0.1, py::arg("seed") = 0,
      "Balanced min-cut cluster id for every node.");

  m.def(
      "edge_cut",
      [](const IntArray& edges, Index n, const IntArray& assign, Index n_clusters) {
        return edge_cut(to_graph(edges, n), to_partition(assign, n_clusters));
      },
      py::arg("edges"), py::arg("n"), py::arg("assign"), py::arg("n_clusters"));

  m.def(
      "compress_features",
      [](const Array& x, const IntArray& assign, Index n_clusters) {
        return to_array(compress_features(to_matrix(x), to_partition(assign, n_clusters)).matrix);
      },
      py::arg("x"), py::arg("assign"), py::arg("n_clusters"), "Cluster means of the feature rows.");

  m.def(
      "lift",
      [](const Array& z_c, const IntArray& assign) {
        const DenseMatrix z = to_matrix(z_c);
        return to_array(lift(z, to_partition(assign, z.rows())));
      },
      py::arg("z_c"), py::arg("assign"));

  m.def(
      "train",
      [](const IntArray& edges, const Array& x, const std::string& config) { return train_impl(edges, x, config, false); },
      py::arg("edges"), py::arg("x"), py::arg("config") = "{}",
      "Compressed training. `config` is a JSON object with TrainConfig field names.");

  m.def(
      "full_graph_train",
      [](const IntArray& edges, const Array& x, const std::string& config) { return train_impl(edges, x, config, true); },
      py::arg("edges"), py::arg("x"), py::arg("config") = "{}");

  m.def(
      "infer",
      [](const IntArray& edges, const Array& x, const std::vector<Array>& weights, const std::string& arch,
         const std::pair<std::string, std::string>& activations) {
        const DenseMatrix features = to_matrix(x);
        return to_array(infer(to_graph(edges, features.rows()), features, to_params(weights, arch, activations)));
      },
      py::arg("edges"), py::arg("x"), py::arg("weights"), py::arg("arch") = "mlp2",
      py::arg("activations") = std::pair<std::string, std::string>{"relu", "relu"});

  m.def(
      "linear_probe",
      [](const Array& z, const std::vector<int>& labels, const IntArray& train_idx, const IntArray& test_idx,
         std::uint64_t seed) {
        return linear_probe(to_matrix(z), labels, Split{to_ids(train_idx), to_ids(test_idx)}, {.seed = seed})
            .accuracy;
      },
      py::arg("z"), py::arg("labels"), py::arg("train"), py::arg("test"), py::arg("seed") = 0);

  m.def(
      "check_theorem1",
      [](Index n, double p, Index n_clusters, Index d, Index d_out, std::uint64_t seed) {
        auto r = check_theorem1(n, p, n_clusters, d, d_out, seed);
        py::dict out;
        out["lhs"] = r.lhs;
        out["rhs"] = r.rhs;
        out["holds"] = r.holds;
        out["remainder_norm"] = r.remainder_norm;
        return out;
      },
      py::arg("n"), py::arg("p"), py::arg("n_clusters"), py::arg("d") = 16, py::arg("d_out") = 8,
      py::arg("seed") = 0);

  m.def("check_appendix_c", &check_appendix_c, py::arg("n"), py::arg("n_clusters"), py::arg("d"), py::arg("h"),
        py::arg("d_out"), py::arg("seed") = 0);

  m.attr("__version__") = tool_version();
}
