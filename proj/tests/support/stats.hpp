#pragma once

// Independent statistical oracles for the tests. Deliberately uses the
// standard library generator rather than the library's own streams.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "coevolve/linalg.hpp"

namespace testsupport {

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

/// Asymptotic critical value of the two-sample KS statistic at level alpha.
inline double ks_critical(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

/// Regularized upper incomplete gamma Q(a, x) (series / continued fraction).
inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double sum = 1.0 / a, del = sum, ap = a;
    for (int n = 0; n < 1000; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

/// Survival function of the chi-square distribution.
inline double chi2_sf(double x, double dof) { return gamma_q(0.5 * dof, 0.5 * x); }

/// Random symmetric PSD matrix Q diag(lambda) Q^T with log-uniform
/// eigenvalues in [lo, hi] and a Haar-ish orthogonal Q from Gram-Schmidt.
inline coevolve::SymMatrix random_psd(std::size_t d, double lo, double hi, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
  std::vector<std::vector<double>> q(d, std::vector<double>(d));
  for (std::size_t k = 0; k < d; ++k) {
    for (auto& v : q[k]) v = normal(gen);
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += q[k][i] * q[j][i];
      for (std::size_t i = 0; i < d; ++i) q[k][i] -= dot * q[j][i];
    }
    double norm = 0.0;
    for (double v : q[k]) norm += v * v;
    norm = std::sqrt(norm);
    for (auto& v : q[k]) v /= norm;
  }
  std::vector<double> lambda(d);
  for (auto& l : lambda) l = std::exp(unif(gen));
  coevolve::SymMatrix a(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += q[k][i] * lambda[k] * q[k][j];
      a(i, j) = s;
    }
  }
  a.symmetrize();
  return a;
}

}  // namespace testsupport
