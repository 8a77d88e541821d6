#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fockforge/error.hpp"

namespace fockforge {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same(const Matrix& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionError("matrix shape mismatch");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

/// Square symmetric matrix stored full. Every mutator keeps (p,q) and
/// (q,p) equal.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n) : m_(n, n) {}

  /// Averages the two triangles of a square matrix.
  static SymMatrix symmetrized(const Matrix& a) {
    if (!a.square()) throw DimensionError("symmetrized: matrix not square");
    SymMatrix s(a.rows());
    for (std::size_t p = 0; p < a.rows(); ++p)
      for (std::size_t q = 0; q <= p; ++q) s.set(p, q, 0.5 * (a(p, q) + a(q, p)));
    return s;
  }

  /// Adopts a square matrix that must already be exactly symmetric.
  static SymMatrix from_symmetric(Matrix a) {
    if (!a.square()) throw DimensionError("from_symmetric: matrix not square");
    for (std::size_t p = 0; p < a.rows(); ++p)
      for (std::size_t q = 0; q < p; ++q)
        if (a(p, q) != a(q, p)) throw Error("from_symmetric: matrix is not symmetric");
    SymMatrix s;
    s.m_ = std::move(a);
    return s;
  }

  static SymMatrix identity(std::size_t n) {
    SymMatrix s;
    s.m_ = Matrix::identity(n);
    return s;
  }

  std::size_t size() const noexcept { return m_.rows(); }
  double operator()(std::size_t p, std::size_t q) const { return m_(p, q); }

  void set(std::size_t p, std::size_t q, double v) {
    m_(p, q) = v;
    m_(q, p) = v;
  }
  void add(std::size_t p, std::size_t q, double v) {
    m_(p, q) += v;
    if (p != q) m_(q, p) += v;
  }

  const Matrix& matrix() const noexcept { return m_; }
  std::span<const double> data() const noexcept { return m_.data(); }
  double max_abs() const { return m_.max_abs(); }

  SymMatrix& operator+=(const SymMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    m_ -= o.m_;
    return *this;
  }
  SymMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  Matrix m_;
};

/// C = A * B.
inline Matrix gemm(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("gemm: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row(k).data();
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

/// C = A^T * B.
inline Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("gemm_tn: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ak = a.row(k).data();
    const double* bk = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.row(i).data();
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

/// X^T F X, symmetrized to remove rounding asymmetry.
inline SymMatrix transform(const Matrix& x, const SymMatrix& f) {
  if (x.rows() != f.size()) throw DimensionError("transform: dimension mismatch");
  return SymMatrix::symmetrized(gemm_tn(x, gemm(f.matrix(), x)));
}

inline double trace_product(const SymMatrix& a, const SymMatrix& b) {  // tr(A B) for symmetric A, B
  if (a.size() != b.size()) throw DimensionError("trace_product: dimension mismatch");
  double t = 0.0;
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) t += da[i] * db[i];
  return t;
}

} // namespace fockforge
