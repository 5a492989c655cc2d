#include "structcomp/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "structcomp/error.hpp"

namespace structcomp {

DenseMatrix::DenseMatrix(Index rows, Index cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ValidationError("DenseMatrix: negative dimension");
  data_.assign(static_cast<std::size_t>(rows * cols), fill);
}

DenseMatrix::DenseMatrix(Index rows, Index cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0) throw ValidationError("DenseMatrix: negative dimension");
  if (static_cast<Index>(data_.size()) != rows * cols) {
    std::ostringstream os;
    os << "DenseMatrix: data length " << data_.size() << " does not match " << rows << "x" << cols;
    throw ValidationError(os.str());
  }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r == 0 ? 0 : static_cast<Index>(rows.begin()->size());
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(r * c));
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != c) throw ValidationError("DenseMatrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::identity(Index n) {
  DenseMatrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::random_uniform(Index rows, Index cols, double lo, double hi, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (auto& v : m.data_) v = uniform(rng, lo, hi);
  return m;
}

DenseMatrix DenseMatrix::random_normal(Index rows, Index cols, double stddev, Rng& rng) {
  DenseMatrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : m.data_) v = dist(rng);
  return m;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void DenseMatrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(DenseMatrix a, double s) { return a *= s; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

std::string shape_string(const DenseMatrix& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const std::string& what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError(what + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
  }
}

namespace {

// out[r] += a[r][k] * b[k] for four output rows at once, so each row of b is
// streamed once per four rows of a. Every output entry still accumulates over
// k in ascending order, the same sum as the plain triple loop.
void accumulate_rows(const double* const* a_rows, Index a_stride, int count, Index inner_dim, const DenseMatrix& b,
                     double* const* out_rows) {
  const Index n = b.cols();
  for (Index k = 0; k < inner_dim; ++k) {
    const double* b_row = b.row(k).data();
    if (count == 4) {
      const double s0 = a_rows[0][k * a_stride];
      const double s1 = a_rows[1][k * a_stride];
      const double s2 = a_rows[2][k * a_stride];
      const double s3 = a_rows[3][k * a_stride];
      double* o0 = out_rows[0];
      double* o1 = out_rows[1];
      double* o2 = out_rows[2];
      double* o3 = out_rows[3];
      for (Index j = 0; j < n; ++j) {
        const double bj = b_row[j];
        o0[j] += s0 * bj;
        o1[j] += s1 * bj;
        o2[j] += s2 * bj;
        o3[j] += s3 * bj;
      }
    } else {
      for (int r = 0; r < count; ++r) {
        const double s = a_rows[r][k * a_stride];
        double* o = out_rows[r];
        for (Index j = 0; j < n; ++j) o[j] += s * b_row[j];
      }
    }
  }
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ValidationError("matmul: inner dimensions differ (" + shape_string(a) + " * " + shape_string(b) + ")");
  }
  DenseMatrix out(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); i += 4) {
    const int count = static_cast<int>(std::min<Index>(4, a.rows() - i));
    const double* a_rows[4];
    double* out_rows[4];
    for (int r = 0; r < count; ++r) {
      a_rows[r] = a.row(i + r).data();
      out_rows[r] = out.row(i + r).data();
    }
    accumulate_rows(a_rows, 1, count, a.cols(), b, out_rows);
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ValidationError("matmul_tn: row counts differ (" + shape_string(a) + "ᵀ * " + shape_string(b) + ")");
  }
  DenseMatrix out(a.cols(), b.cols());
  if (a.rows() == 0 || a.cols() == 0) return out;
  const double* base = a.row(0).data();
  for (Index i = 0; i < a.cols(); i += 4) {
    const int count = static_cast<int>(std::min<Index>(4, a.cols() - i));
    const double* a_cols[4];
    double* out_rows[4];
    for (int r = 0; r < count; ++r) {
      a_cols[r] = base + i + r;
      out_rows[r] = out.row(i + r).data();
    }
    accumulate_rows(a_cols, a.cols(), count, a.rows(), b, out_rows);
  }
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) {
    throw ValidationError("matmul_nt: column counts differ (" + shape_string(a) + " * " + shape_string(b) + "ᵀ)");
  }
  // Row-times-row dot products do not vectorize; an axpy form against bᵀ does.
  return matmul(a, transpose(b));
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "hadamard");
  DenseMatrix out = a;
  auto ov = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= bv[i];
  return out;
}

double inner(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "inner");
  double acc = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return acc;
}

double frobenius_norm(const DenseMatrix& a) { return std::sqrt(inner(a, a)); }

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(av[i] - bv[i]));
  return m;
}

double row_norm(const DenseMatrix& a, Index r) {
  double acc = 0.0;
  for (double v : a.row(r)) acc += v * v;
  return std::sqrt(acc);
}

double max_row_norm(const DenseMatrix& a) {
  double m = 0.0;
  for (Index r = 0; r < a.rows(); ++r) m = std::max(m, row_norm(a, r));
  return m;
}

double spectral_norm(const DenseMatrix& a, double tol) {
  if (a.empty()) throw ValidationError("spectral_norm: empty matrix");
  if (!a.all_finite()) throw ValidationError("spectral_norm: non-finite entries");
  if (max_abs(a) == 0.0) return 0.0;

  // Fixed-seed start vector: deterministic, and almost surely not orthogonal
  // to the leading right singular vector.
  Rng rng = make_rng(0x5eedULL);
  DenseMatrix v = DenseMatrix::random_uniform(a.cols(), 1, 0.5, 1.5, rng);
  v *= 1.0 / frobenius_norm(v);

  double sigma = 0.0;
  constexpr int kMaxIter = 200000;
  for (int it = 0; it < kMaxIter; ++it) {
    DenseMatrix av = matmul(a, v);
    const double next_sigma = frobenius_norm(av);
    DenseMatrix w = matmul_tn(a, av);
    const double wn = frobenius_norm(w);
    if (wn == 0.0) return next_sigma;
    v = w * (1.0 / wn);
    if (it > 0 && std::abs(next_sigma - sigma) <= tol * next_sigma) return next_sigma;
    sigma = next_sigma;
  }
  return sigma;
}

}  // namespace structcomp
