#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "structcomp/rng.hpp"

namespace structcomp {

using Index = std::int64_t;

/// Row-major double-precision matrix. Holds features X, compressed features
/// X_c, embeddings Z and all weight matrices.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols, double fill = 0.0);
  DenseMatrix(Index rows, Index cols, std::vector<double> data);

  /// Literal construction for tests and small examples; all rows must have equal length.
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(Index n);
  /// Entries drawn uniformly from [lo, hi).
  static DenseMatrix random_uniform(Index rows, Index cols, double lo, double hi, Rng& rng);
  static DenseMatrix random_normal(Index rows, Index cols, double stddev, Rng& rng);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(Index r, Index c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  double operator()(Index r, Index c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }

  std::span<double> row(Index r) {
    return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<const double> row(Index r) const {
    return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool all_finite() const;
  void fill(double v);

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(DenseMatrix a, double s);
DenseMatrix operator*(double s, DenseMatrix a);

// Products. Inner loops run over contiguous memory in a fixed order, so the
// results are bit-reproducible for identical inputs.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);      // a b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);   // aᵀ b
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);   // a bᵀ
DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);

/// Sum of elementwise products, i.e. Tr(aᵀ b).
double inner(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double row_norm(const DenseMatrix& a, Index r);
double max_row_norm(const DenseMatrix& a);

/// Largest singular value by power iteration on aᵀa, stopping once the
/// relative change of the estimate falls below `tol`.
double spectral_norm(const DenseMatrix& a, double tol = 1e-12);

/// Throws ValidationError naming `what` and both shapes unless they match.
void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const std::string& what);
std::string shape_string(const DenseMatrix& a);

}  // namespace structcomp
