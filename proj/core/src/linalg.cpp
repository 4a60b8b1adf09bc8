#include "coevolve/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "coevolve/error.hpp"

namespace coevolve {

namespace {

constexpr double kJacobiTolerance = 1e-14;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kNegativityTolerance = 1e-10;

void require_symmetric(const SymMatrix& a) {
  if (!a.is_symmetric()) {
    throw Error(ErrorCode::NonSymmetric, "matrix of dim " + std::to_string(a.dim()) +
                                             " violates the symmetry tolerance");
  }
}

void require_tolerated_negativity(std::span<const double> values) {
  double scale = 0.0;
  for (double v : values) scale += std::abs(v);
  const double min_value = *std::min_element(values.begin(), values.end());
  if (min_value < -kNegativityTolerance * scale) {
    throw Error(ErrorCode::NotPositiveSemidefinite,
                "smallest eigenvalue " + std::to_string(min_value) + " below tolerance");
  }
}

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) sum += a[i * n + j] * a[i * n + j];
  return std::sqrt(sum);
}

}  // namespace

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "matrix product");
  const std::size_t n = a.dim();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

SymMatrix::SymMatrix(std::size_t dim, std::vector<double> row_major)
    : dim_(dim), data_(std::move(row_major)) {
  if (data_.size() != dim_ * dim_) {
    throw Error(ErrorCode::DimMismatch, "expected " + std::to_string(dim_ * dim_) +
                                            " entries, got " + std::to_string(data_.size()));
  }
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : dim_(rows.size()) {
  data_.reserve(dim_ * dim_);
  for (const auto& row : rows) {
    if (row.size() != dim_) throw Error(ErrorCode::DimMismatch, "ragged matrix literal");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

SymMatrix SymMatrix::identity(std::size_t dim) { return scaled_identity(dim, 1.0); }

SymMatrix SymMatrix::scaled_identity(std::size_t dim, double scale) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = scale;
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool SymMatrix::is_symmetric() const {
  if (dim_ == 0) return false;
  const double tol = 1e-12 * (1.0 + max_abs());
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i + 1; j < dim_; ++j)
      if (!(std::abs((*this)(i, j) - (*this)(j, i)) <= tol)) return false;
  return true;
}

void SymMatrix::symmetrize() {
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i + 1; j < dim_; ++j) {
      const double avg = 0.5 * ((*this)(i, j) + (*this)(j, i));
      (*this)(i, j) = avg;
      (*this)(j, i) = avg;
    }
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& rhs) {
  if (rhs.dim_ != dim_) throw Error(ErrorCode::DimMismatch, "matrix sum");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& rhs) {
  if (rhs.dim_ != dim_) throw Error(ErrorCode::DimMismatch, "matrix difference");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

Matrix multiply(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "matrix product");
  const std::size_t n = a.dim();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

SymMatrix congruence(const Matrix& q, std::span<const double> values) {
  const std::size_t n = q.dim();
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q(i, k) * values[k] * q(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  return out;
}

EigenDecomposition eigen_sym(const SymMatrix& input) {
  require_symmetric(input);
  const std::size_t n = input.dim();

  SymMatrix sym = input;
  sym.symmetrize();

  // Power-of-two rescaling is exact and keeps rotations away from the
  // subnormal range when covariances have collapsed.
  int exponent = 0;
  const double max_abs = sym.max_abs();
  if (max_abs > 0.0 && std::isfinite(max_abs)) std::frexp(max_abs, &exponent);

  std::vector<double> a(sym.data().begin(), sym.data().end());
  for (double& v : a) v = std::ldexp(v, -exponent);
  Matrix v = Matrix::identity(n);

  double frob = 0.0;
  for (double x : a) frob += x * x;
  frob = std::sqrt(frob);
  if (!std::isfinite(frob)) throw Error(ErrorCode::EigFailure, "non-finite matrix entries");

  bool converged = false;
  for (int sweep = 0; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a, n) <= kJacobiTolerance * frob) {
      converged = true;
      break;
    }
    if (sweep == kJacobiMaxSweeps) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double tau = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(tau) > 1e150) {
          t = 0.5 / tau;
        } else {
          t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw Error(ErrorCode::EigFailure, "Jacobi did not converge within " +
                                           std::to_string(kJacobiMaxSweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = std::ldexp(a[order[k] * n + order[k]], exponent);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

SymMatrix sym_sqrt(const SymMatrix& a, double eig_floor) {
  EigenDecomposition eig = eigen_sym(a);
  require_tolerated_negativity(eig.values);
  for (double& lambda : eig.values) lambda = std::sqrt(std::max(lambda, eig_floor));
  return congruence(eig.vectors, eig.values);
}

double trace_sqrt(const SymMatrix& a) {
  const EigenDecomposition eig = eigen_sym(a);
  require_tolerated_negativity(eig.values);
  double sum = 0.0;
  for (double lambda : eig.values) sum += std::sqrt(std::max(lambda, 0.0));
  return sum;
}

CholeskyFactor cholesky_jitter(const SymMatrix& a, double base_jitter) {
  require_symmetric(a);
  const std::size_t n = a.dim();

  std::vector<double> levels{0.0};
  for (int k = 0; k <= 6; ++k) levels.push_back(base_jitter * std::pow(10.0, k));

  for (double jitter : levels) {
    Matrix l(n);
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
      double pivot = a(j, j) + jitter;
      for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
      if (!(pivot > 0.0)) {
        ok = false;
        break;
      }
      const double ljj = std::sqrt(pivot);
      l(j, j) = ljj;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = 0.5 * (a(i, j) + a(j, i));
        for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
        l(i, j) = s / ljj;
      }
    }
    if (ok) return CholeskyFactor{std::move(l), jitter};
  }
  throw Error(ErrorCode::NotFactorizable,
              "no jitter level up to 1e6 * " + std::to_string(base_jitter) + " succeeded");
}

double min_eig_of_difference(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  return eigen_sym(b - a).values.front();
}

}  // namespace coevolve
