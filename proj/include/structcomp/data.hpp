#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "structcomp/dense_matrix.hpp"
#include "structcomp/sparse_graph.hpp"

namespace structcomp {

struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> test;
};

struct LabeledDataset {
  SparseGraph graph;
  DenseMatrix features;
  std::vector<int> labels;
  int num_classes = 0;
  Split split;
};

SparseGraph gen_er(Index n, double p, std::uint64_t seed);

struct SbmOptions {
  Index n = 800;
  int blocks = 4;
  double p_in = 0.1;
  double p_out = 0.01;
  Index feature_dim = 32;
  double feature_sep = 2.0;  // distance between any two block means
  double noise_std = 1.0;
  std::uint64_t seed = 0;
};

/// Block-structured ER graph with Gaussian block features. Node labels are a
/// seeded shuffle of the blocks, so block membership is not visible in node order.
LabeledDataset gen_sbm(const SbmOptions& opts);

/// `per_class` seeded training nodes per class (all of a class if it is
/// smaller), everything else is test.
Split split_per_class(const std::vector<int>& labels, int num_classes, int per_class, std::uint64_t seed);

/// Adds round(fraction·m) uniformly random edges not already present.
SparseGraph add_noise_edges(const SparseGraph& g, double fraction, std::uint64_t seed);

struct ProbeParams {
  DenseMatrix weight;  // d′ × C
  std::vector<double> bias;
};

struct ProbeOptions {
  int epochs = 300;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  ProbeParams params;
  double accuracy = 0.0;
};

/// Softmax regression on frozen embeddings, full-batch gradient descent on the
/// train nodes (columns standardized with train statistics), accuracy on test.
ProbeResult linear_probe(const DenseMatrix& z, const std::vector<int>& labels, const Split& split,
                         const ProbeOptions& opts = {});
ProbeResult linear_probe(const DenseMatrix& z, const LabeledDataset& data, const ProbeOptions& opts = {});

/// Best agreement between two labelings over all relabelings (Hungarian).
double cluster_agreement(const std::vector<int>& a, const std::vector<int>& b);

/// Directory layout: edges.tsv, features.bin or features.csv, labels.txt and
/// optional split.json. A seeded 20-per-class split is made when split.json is absent.
LabeledDataset load_dataset(const std::filesystem::path& dir, std::uint64_t split_seed = 0);
void save_dataset(const std::filesystem::path& dir, const LabeledDataset& data);

}  // namespace structcomp
