#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "coevolve/error.hpp"
#include "coevolve/linalg.hpp"
#include "stats.hpp"

using namespace coevolve;

namespace {

Eigen::MatrixXd to_eigen(const SymMatrix& a) {
  Eigen::MatrixXd m(a.dim(), a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) m(i, j) = a(i, j);
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd m(a.dim(), a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) m(i, j) = a(i, j);
  return m;
}

double max_diff(const SymMatrix& a, const SymMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::fabs(a(i, j) - b(i, j)));
  return m;
}

SymMatrix squared(const SymMatrix& s) {
  const Matrix p = multiply(s, s);
  SymMatrix out(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i)
    for (std::size_t j = 0; j < s.dim(); ++j) out(i, j) = p(i, j);
  return out;
}

}  // namespace

TEST_CASE("sym_sqrt closed cases") {
  CHECK(max_diff(sym_sqrt(SymMatrix::identity(2)), SymMatrix::identity(2)) < 1e-15);
  CHECK(max_diff(sym_sqrt(SymMatrix::diagonal({4.0, 9.0})), SymMatrix::diagonal({2.0, 3.0})) <
        1e-14);

  // [[2,1],[1,2]] = Q diag(1,3) Q^T with Q = [[1,1],[-1,1]]/sqrt2, so the
  // root is (1/2)[[1+r, r-1],[r-1, 1+r]] with r = sqrt3.
  const SymMatrix a{{2.0, 1.0}, {1.0, 2.0}};
  const SymMatrix s = sym_sqrt(a);
  const double r = std::sqrt(3.0);
  CHECK(s(0, 0) == doctest::Approx((1.0 + r) / 2).epsilon(1e-13));
  CHECK(s(0, 1) == doctest::Approx((r - 1.0) / 2).epsilon(1e-13));
  CHECK((squared(s) - a).frobenius_norm() <= 1e-9 * a.frobenius_norm());
  const EigenDecomposition e = eigen_sym(s);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(e.values[1] == doctest::Approx(r).epsilon(1e-13));
}

TEST_CASE("sym_sqrt floors eigenvalues") {
  const SymMatrix a = SymMatrix::diagonal({4.0, 0.0});
  const SymMatrix s = sym_sqrt(a, 0.25);
  CHECK(s(0, 0) == doctest::Approx(2.0));
  CHECK(s(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("sym_sqrt rejects asymmetric and clearly indefinite input") {
  SymMatrix a(2, {1.0, 0.5, 0.0, 1.0});
  CHECK_THROWS_AS(sym_sqrt(a), Error);
  try {
    sym_sqrt(a);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonSymmetric);
  }
  // Tolerated round-off negativity is clamped.
  CHECK(trace_sqrt(SymMatrix::diagonal({1.0, -1e-13})) == doctest::Approx(1.0));
  try {
    trace_sqrt(SymMatrix::diagonal({1.0, -0.5}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveSemidefinite);
  }
}

TEST_CASE("trace_sqrt examples") {
  CHECK(trace_sqrt(SymMatrix::scaled_identity(2, 0.01)) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(trace_sqrt(SymMatrix::diagonal({4.0, 9.0})) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(trace_sqrt(SymMatrix(2)) == 0.0);
}

TEST_CASE("eigen_sym agrees with an independent solver") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 1 + rep % 6;
    const SymMatrix a = testsupport::random_psd(d, 1e-8, 1e3, gen);
    const EigenDecomposition mine = eigen_sym(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(a));
    for (std::size_t k = 0; k < d; ++k) {
      CHECK(std::fabs(mine.values[k] - ref.eigenvalues()(k)) <= 1e-11 * 1e3);
    }
    // Columns are orthonormal eigenvectors.
    const Eigen::MatrixXd q = to_eigen(mine.vectors);
    CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-12);
  }
}

TEST_CASE("sqrt reconstruction, concavity, nuclear norm and monotonicity") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t d = 1 + rep % 6;
    const SymMatrix a = testsupport::random_psd(d, 1e-8, 1e3, gen);
    const SymMatrix b = testsupport::random_psd(d, 1e-8, 1e3, gen);
    const SymMatrix ra = sym_sqrt(a);
    const SymMatrix rb = sym_sqrt(b);
    CHECK((squared(ra) - a).frobenius_norm() <= 1e-8 * a.frobenius_norm());

    const double lambda = unif(gen);
    const SymMatrix mix_of_roots = lambda * ra + (1.0 - lambda) * rb;
    const SymMatrix root_of_mix = sym_sqrt(lambda * a + (1.0 - lambda) * b);
    CHECK(min_eig_of_difference(mix_of_roots, root_of_mix) >= -1e-9);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(ra));
    const double nuclear = svd.singularValues().sum();
    CHECK(std::fabs(trace_sqrt(a) - nuclear) <= 1e-10 * nuclear);
    CHECK(trace_sqrt(a) == doctest::Approx(ra.trace()).epsilon(1e-10));

    const SymMatrix bigger = a + b;
    CHECK(trace_sqrt(a) <= trace_sqrt(bigger) + 1e-10);
  }
}

TEST_CASE("cholesky_jitter") {
  const CholeskyFactor id = cholesky_jitter(SymMatrix::identity(2), 1e-12);
  CHECK(id.jitter == 0.0);
  CHECK(id.lower(0, 0) == 1.0);
  CHECK(id.lower(1, 0) == 0.0);
  CHECK(id.lower(1, 1) == 1.0);

  const CholeskyFactor rd = cholesky_jitter(SymMatrix::diagonal({4.0, 0.0}), 1e-12);
  CHECK(rd.jitter >= 1e-12);
  CHECK(rd.lower(1, 1) > 0.0);

  // Hand factorization: L = [[sqrt2, 0], [1/sqrt2, sqrt(3/2)]].
  const CholeskyFactor f = cholesky_jitter(SymMatrix{{2.0, 1.0}, {1.0, 2.0}}, 0.0);
  CHECK(f.lower(0, 0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(f.lower(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(f.lower(1, 1) == doctest::Approx(std::sqrt(1.5)));

  try {
    cholesky_jitter(SymMatrix::diagonal({1.0, -1.0}), 1e-12);
    FAIL("expected NotFactorizable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotFactorizable);
  }
}

TEST_CASE("cholesky_jitter reproduces the matrix") {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 1 + rep % 6;
    const SymMatrix a = testsupport::random_psd(d, 1e-3, 1e3, gen);
    const CholeskyFactor f = cholesky_jitter(a, 1e-12);
    const Eigen::MatrixXd l = to_eigen(f.lower);
    const Eigen::MatrixXd target =
        to_eigen(a) + f.jitter * Eigen::MatrixXd::Identity(d, d);
    CHECK((l * l.transpose() - target).norm() <= 1e-10 * target.norm());
  }
}

TEST_CASE("min_eig_of_difference") {
  const SymMatrix a = SymMatrix::diagonal({1.0, 3.0});
  CHECK(min_eig_of_difference(a, a) == doctest::Approx(0.0));
  CHECK(min_eig_of_difference(SymMatrix(2), SymMatrix::identity(2)) == doctest::Approx(1.0));
  CHECK(min_eig_of_difference(a, SymMatrix::diagonal({2.0, 2.0})) == doctest::Approx(-1.0));
  try {
    min_eig_of_difference(SymMatrix(2), SymMatrix(3));
    FAIL("expected DimMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimMismatch);
  }
}
