#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace coevolve {

/// Dense square matrix, row-major. Used for eigenvector bases and
/// triangular factors; symmetric data lives in SymMatrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  static Matrix identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

/// A d x d real matrix that is symmetric up to
/// |A[i][j] - A[j][i]| <= 1e-12 * (1 + max|A|). Storage is the full square.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}
  SymMatrix(std::size_t dim, std::vector<double> row_major);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix identity(std::size_t dim);
  static SymMatrix scaled_identity(std::size_t dim, double scale);
  static SymMatrix diagonal(std::span<const double> diag);
  static SymMatrix diagonal(std::initializer_list<double> diag);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  std::span<const double> data() const noexcept { return data_; }

  double trace() const;
  double max_abs() const;
  double frobenius_norm() const;
  bool is_symmetric() const;
  /// Replaces the matrix by (A + A^T) / 2.
  void symmetrize();

  SymMatrix& operator+=(const SymMatrix& rhs);
  SymMatrix& operator-=(const SymMatrix& rhs);
  SymMatrix& operator*=(double s);

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);
/// Product of two symmetric matrices; only symmetric when they commute, so
/// the result is a general Matrix.
Matrix multiply(const SymMatrix& a, const SymMatrix& b);
/// Q * diag(values) * Q^T, symmetrized.
SymMatrix congruence(const Matrix& q, std::span<const double> values);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

/// Cyclic Jacobi eigensolver. The input is symmetrized before decomposition.
/// Throws NonSymmetric or EigFailure (no convergence within 100 sweeps).
EigenDecomposition eigen_sym(const SymMatrix& a);

/// Q * diag(sqrt(max(lambda_k, eig_floor))) * Q^T.
SymMatrix sym_sqrt(const SymMatrix& a, double eig_floor = 0.0);

/// Sum of sqrt(max(lambda_k, 0)): the nuclear norm of the PSD square root.
double trace_sqrt(const SymMatrix& a);

struct CholeskyFactor {
  Matrix lower;
  double jitter = 0.0;  // j such that lower * lower^T = A + j I
};

/// Lower Cholesky factor of A + j I for the first j in
/// {0, base, 10 base, ..., 1e6 base} that factorizes with strictly positive
/// pivots. Throws NotFactorizable when every level fails.
CholeskyFactor cholesky_jitter(const SymMatrix& a, double base_jitter);

/// Smallest eigenvalue of (b - a); b dominates a in Loewner order iff the
/// result is >= -tol.
double min_eig_of_difference(const SymMatrix& a, const SymMatrix& b);

}  // namespace coevolve
