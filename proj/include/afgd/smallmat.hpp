#pragma once

// Small dense linear algebra: vectors, rectangular matrices used to assemble
// state-space blocks, and symmetric matrices (dim <= 6) with a cyclic Jacobi
// eigensolver for semidefiniteness decisions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afgd/error.hpp"

namespace afgd {

/// Default slack for "S is negative semidefinite" decisions.
inline constexpr double kNsdTolerance = 1e-9;

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

namespace detail {

inline void require_same_size(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw InvalidInput(std::string(op) + ": dimension mismatch (" +
                       std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + ")");
  }
}

}  // namespace detail

inline Vector operator+(const Vector& a, const Vector& b) {
  detail::require_same_size(a, b, "vector +");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vector operator-(const Vector& a, const Vector& b) {
  detail::require_same_size(a, b, "vector -");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector operator*(double s, const Vector& v) {
  Vector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = s * v[i];
  return r;
}

inline double dot(const Vector& a, const Vector& b) {
  detail::require_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Euclidean norm.
inline double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

/// Row-major dense matrix of arbitrary (small) shape.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw InvalidInput("Matrix: ragged rows");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidInput("matrix *: inner dimension mismatch");
  Matrix r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInput("matrix +: shape mismatch");
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = s * a(i, j);
  return r;
}

inline Vector operator*(const Matrix& a, const Vector& v) {
  if (a.cols() != v.size()) throw InvalidInput("matrix-vector *: dimension mismatch");
  Vector r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

/// Kronecker product a (x) b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          r(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return r;
}

/// Symmetric matrix of dimension at most kMaxDim. Input is averaged with its
/// transpose on construction, so entries mirror bit-for-bit.
class SymMatrix {
 public:
  static constexpr std::size_t kMaxDim = 6;

  SymMatrix() = default;

  explicit SymMatrix(std::size_t dim) : dim_(dim) {
    check_dim(dim);
    data_.fill(0.0);
  }

  explicit SymMatrix(const Matrix& m) : dim_(m.rows()) {
    if (m.rows() != m.cols()) throw InvalidInput("SymMatrix: matrix is not square");
    check_dim(dim_);
    data_.fill(0.0);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i; j < dim_; ++j) {
        const double v = i == j ? m(i, i) : 0.5 * (m(i, j) + m(j, i));
        if (!std::isfinite(v)) throw InvalidInput("SymMatrix: non-finite entry");
        at(i, j) = v;
        at(j, i) = v;
      }
  }

  SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : SymMatrix(Matrix(rows)) {}

  static SymMatrix identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }

  /// [[a, b], [b, d]] without going through a heap-backed Matrix.
  static SymMatrix sym2(double a, double b, double d) {
    SymMatrix s(2);
    s.at(0, 0) = a;
    s.at(0, 1) = b;
    s.at(1, 0) = b;
    s.at(1, 1) = d;
    return s;
  }

  static SymMatrix diagonal(std::initializer_list<double> d) {
    SymMatrix s(d.size());
    std::size_t i = 0;
    for (double v : d) {
      s.at(i, i) = v;
      ++i;
    }
    if (!s.all_finite()) throw InvalidInput("SymMatrix: non-finite entry");
    return s;
  }

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * kMaxDim + j]; }

  Matrix to_matrix() const {
    Matrix m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  bool all_finite() const {
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        if (!std::isfinite((*this)(i, j))) return false;
    return true;
  }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim_ != b.dim_) throw InvalidInput("SymMatrix +: dimension mismatch");
    SymMatrix r(a.dim_);
    for (std::size_t i = 0; i < a.dim_; ++i)
      for (std::size_t j = 0; j < a.dim_; ++j) r.at(i, j) = a(i, j) + b(i, j);
    return r;
  }

  friend SymMatrix operator*(double s, const SymMatrix& a) {
    SymMatrix r(a.dim_);
    for (std::size_t i = 0; i < a.dim_; ++i)
      for (std::size_t j = 0; j < a.dim_; ++j) r.at(i, j) = s * a(i, j);
    return r;
  }

  friend SymMatrix operator-(const SymMatrix& a) { return -1.0 * a; }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t i = 0; i < a.dim_; ++i)
      for (std::size_t j = 0; j < a.dim_; ++j)
        if (a(i, j) != b(i, j)) return false;
    return true;
  }

 private:
  static void check_dim(std::size_t dim) {
    if (dim == 0 || dim > kMaxDim)
      throw InvalidInput("SymMatrix: dimension must be in [1, 6], got " +
                         std::to_string(dim));
  }

  double& at(std::size_t i, std::size_t j) { return data_[i * kMaxDim + j]; }

  std::size_t dim_ = 0;
  std::array<double, kMaxDim * kMaxDim> data_{};
};

/// Congruence T^T S T, symmetrized.
inline SymMatrix congruence(const Matrix& t, const SymMatrix& s) {
  return SymMatrix(t.transposed() * s.to_matrix() * t);
}

namespace detail {

using EigenBuffer = std::array<double, SymMatrix::kMaxDim>;

/// Cyclic Jacobi; writes the (unsorted) eigenvalues of s into out[0..dim).
inline void jacobi_eigenvalues(const SymMatrix& s, EigenBuffer& out) {
  if (!s.all_finite()) throw InvalidInput("sym_eigenvalues: non-finite entry");
  const std::size_t n = s.dim();
  constexpr std::size_t K = SymMatrix::kMaxDim;
  std::array<double, K * K> a{};
  auto A = [&a](std::size_t i, std::size_t j) -> double& { return a[i * K + j]; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) = s(i, j);

  constexpr int kMaxSweeps = 100;
  constexpr double kRelTol = 1e-12;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += A(i, i) * A(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * A(i, j) * A(i, j);
    }
    if (std::sqrt(off) <= kRelTol * std::sqrt(diag)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - sn * akq;
          A(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - sn * aqk;
          A(q, k) = sn * apk + c * aqk;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = A(i, i);
}

}  // namespace detail

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
///
/// Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops
/// below 1e-12 times the diagonal norm, or 100 sweeps have run.
inline std::vector<double> sym_eigenvalues(const SymMatrix& s) {
  detail::EigenBuffer buf{};
  detail::jacobi_eigenvalues(s, buf);
  std::vector<double> eig(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(s.dim()));
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline double max_eigenvalue(const SymMatrix& s) {
  detail::EigenBuffer buf{};
  detail::jacobi_eigenvalues(s, buf);
  return *std::max_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(s.dim()));
}

inline double min_eigenvalue(const SymMatrix& s) {
  detail::EigenBuffer buf{};
  detail::jacobi_eigenvalues(s, buf);
  return *std::min_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(s.dim()));
}

/// True iff the largest eigenvalue is <= tol.
inline bool is_nsd(const SymMatrix& s, double tol = kNsdTolerance) {
  if (tol < 0.0) throw InvalidInput("is_nsd: tol must be >= 0");
  return max_eigenvalue(s) <= tol;
}

/// True iff the smallest eigenvalue is > tol.
inline bool is_pd(const SymMatrix& s, double tol = 0.0) {
  if (tol < 0.0) throw InvalidInput("is_pd: tol must be >= 0");
  return min_eigenvalue(s) > tol;
}

}  // namespace afgd
