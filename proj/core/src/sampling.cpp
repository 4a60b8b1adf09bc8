#include "coevolve/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "coevolve/error.hpp"

namespace coevolve {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSeedSalt = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kRunSalt = 0xAEF17502108EF2D9ULL;
constexpr std::uint64_t kPhaseSalt = 0x94D049BB133111EBULL;

std::size_t categorical(std::span<const double> cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<std::size_t>(it - cumulative.begin());
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

RngStream derive_stream(std::uint64_t base_seed, std::uint64_t run_index, std::uint64_t phase_tag) {
  std::uint64_t key = mix64(base_seed ^ kSeedSalt);
  key = mix64(key ^ (run_index * kRunSalt));
  key = mix64(key ^ (phase_tag * kPhaseSalt));
  return RngStream(key, (run_index << 16) | (phase_tag & 0xFFFF));
}

void validate_distribution(std::span<const double> p) {
  if (p.empty()) throw Error(ErrorCode::BadDistribution, "empty probability vector");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::BadDistribution, "entry " + std::to_string(v) + " is not >= 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorCode::BadDistribution, "entries sum to " + std::to_string(sum));
  }
}

std::vector<std::size_t> sample_counts(std::span<const double> p, std::size_t n, RngStream& rng) {
  validate_distribution(p);
  const std::size_t k = p.size();
  std::vector<double> cumulative(k);
  std::partial_sum(p.begin(), p.end(), cumulative.begin());
  // Rounding can leave the total just below 1; route that sliver to the last
  // category with positive mass.
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < k; ++i)
    if (p[i] > 0.0) last_positive = i;
  for (std::size_t i = last_positive; i < k; ++i) cumulative[i] = 1.0;

  std::vector<std::size_t> counts(k, 0);
  for (std::size_t j = 0; j < n; ++j) ++counts[categorical(cumulative, rng.uniform())];
  return counts;
}

std::vector<std::size_t> apportion_counts(std::span<const double> p, std::size_t n) {
  validate_distribution(p);
  const std::size_t k = p.size();
  std::vector<std::size_t> counts(k);
  std::vector<double> remainder(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = static_cast<double>(n) * p[i];
    const double floor_quota = std::floor(quota);
    counts[i] = static_cast<std::size_t>(floor_quota);
    remainder[i] = quota - floor_quota;
    assigned += counts[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; assigned < n; r = (r + 1) % k) {
    if (p[order[r]] > 0.0) {
      ++counts[order[r]];
      ++assigned;
    }
  }
  // Floating-point quotas can overshoot by one when sum(p) slightly exceeds 1.
  for (std::size_t r = k; assigned > n && r-- > 0;) {
    if (counts[order[r]] > 0) {
      --counts[order[r]];
      --assigned;
    }
  }
  return counts;
}

GaussianSampler::GaussianSampler(std::vector<double> mean, const SymMatrix& cov)
    : mean_(std::move(mean)) {
  if (cov.dim() != mean_.size()) {
    throw Error(ErrorCode::DimMismatch, "mean has dim " + std::to_string(mean_.size()) +
                                            ", covariance " + std::to_string(cov.dim()));
  }
  if (mean_.size() > kMaxDim) {
    throw Error(ErrorCode::InvalidArgument, "dimension above " + std::to_string(kMaxDim));
  }
  for (std::size_t i = 0; i < cov.dim(); ++i)
    if (cov(i, i) != 0.0) active_.push_back(i);
  if (active_.empty()) return;

  SymMatrix sub(active_.size());
  for (std::size_t a = 0; a < active_.size(); ++a)
    for (std::size_t b = 0; b < active_.size(); ++b) sub(a, b) = cov(active_[a], active_[b]);
  factor_ = cholesky_jitter(sub, 1e-12).lower;
}

void GaussianSampler::draw(RngStream& rng, std::span<double> out) const {
  std::copy(mean_.begin(), mean_.end(), out.begin());
  const std::size_t m = active_.size();
  std::array<double, kMaxDim> z{};
  for (std::size_t a = 0; a < m; ++a) z[a] = rng.normal();
  for (std::size_t a = 0; a < m; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b <= a; ++b) s += factor_(a, b) * z[b];
    out[active_[a]] += s;
  }
}

void GaussianSampler::draw_into(RngStream& rng, PointSet& points, std::size_t first,
                                std::size_t count) const {
  for (std::size_t j = 0; j < count; ++j) draw(rng, points.row(first + j));
}

PointSet sample_gaussian(std::span<const double> mean, const SymMatrix& cov, std::size_t n,
                         RngStream& rng) {
  GaussianSampler sampler(std::vector<double>(mean.begin(), mean.end()), cov);
  PointSet points(mean.size(), n);
  sampler.draw_into(rng, points, 0, n);
  return points;
}

SymMatrix sample_wishart(const SymMatrix& scale, std::size_t dof, RngStream& rng) {
  if (dof < 1) throw Error(ErrorCode::InvalidArgument, "Wishart dof must be >= 1");
  const std::size_t d = scale.dim();
  GaussianSampler sampler(std::vector<double>(d, 0.0), scale);
  std::array<double, kMaxDim> x{};
  SymMatrix w(d);
  for (std::size_t k = 0; k < dof; ++k) {
    sampler.draw(rng, std::span<double>(x.data(), d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) w(i, j) += x[i] * x[j];
  }
  return w;
}

}  // namespace coevolve
