#pragma once
// Dense reference implementations used as test oracles.

#include <Eigen/Dense>

#include <cmath>
#include <functional>

#include "structcomp/dense_matrix.hpp"
#include "structcomp/partition.hpp"
#include "structcomp/sparse_graph.hpp"

namespace oracle {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Mat to_eigen(const structcomp::DenseMatrix& m) {
  Mat out(m.rows(), m.cols());
  for (structcomp::Index r = 0; r < m.rows(); ++r)
    for (structcomp::Index c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

inline Mat to_eigen(const structcomp::SparseGraph& g) {
  Mat out = Mat::Zero(g.num_nodes(), g.num_nodes());
  for (structcomp::Index i = 0; i < g.num_nodes(); ++i) {
    auto nb = g.neighbors(i);
    auto wt = g.weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) out(i, nb[k]) = wt[k];
  }
  return out;
}

inline structcomp::DenseMatrix from_eigen(const Mat& m) {
  structcomp::DenseMatrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

inline Mat binary_partition(const structcomp::Partition& p) {
  Mat out = Mat::Zero(p.num_nodes(), p.num_clusters());
  for (structcomp::Index i = 0; i < p.num_nodes(); ++i) out(i, p.cluster_of(i)) = 1.0;
  return out;
}

inline Mat normalized_partition(const structcomp::Partition& p) {
  Mat out = binary_partition(p);
  for (Eigen::Index c = 0; c < out.cols(); ++c) out.col(c) /= out.col(c).sum();
  return out;
}

// D̃^{-1/2}(A + I)D̃^{-1/2}, from the dense adjacency.
inline Mat normalized_adjacency(const Mat& a) {
  Mat at = a + Mat::Identity(a.rows(), a.cols());
  Eigen::VectorXd d = at.rowwise().sum();
  Eigen::VectorXd s = d.array().rsqrt();
  return s.asDiagonal() * at * s.asDiagonal();
}

inline Mat relu(const Mat& m) { return m.cwiseMax(0.0); }

// Relative error ‖analytic − numeric‖_F / ‖numeric‖_F of a gradient against
// central differences of f over every entry of w.
inline double fd_check(structcomp::DenseMatrix& w, const structcomp::DenseMatrix& grad,
                       const std::function<double()>& f, double eps = 1e-6) {
  double diff2 = 0.0;
  double ref2 = 0.0;
  for (structcomp::Index r = 0; r < w.rows(); ++r) {
    for (structcomp::Index c = 0; c < w.cols(); ++c) {
      const double saved = w(r, c);
      w(r, c) = saved + eps;
      const double up = f();
      w(r, c) = saved - eps;
      const double down = f();
      w(r, c) = saved;
      const double numeric = (up - down) / (2.0 * eps);
      diff2 += (numeric - grad(r, c)) * (numeric - grad(r, c));
      ref2 += numeric * numeric;
    }
  }
  return std::sqrt(diff2) / std::max(std::sqrt(ref2), 1e-300);
}

}  // namespace oracle
