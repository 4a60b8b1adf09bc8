#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coevolve/linalg.hpp"

namespace coevolve {

/// Counter-based SplitMix64 stream. Output k is mix64(key + k * golden),
/// so a stream is fully determined by its key and needs no shared state.
///
/// Normal variates use the Marsaglia polar method with the spare value
/// cached; the method is part of the reproducibility contract and must not
/// change without invalidating every golden CSV.
class RngStream {
 public:
  RngStream(std::uint64_t key, std::uint64_t stream_id) : key_(key), stream_id_(stream_id) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal.
  double normal();
  bool bernoulli(double probability) { return uniform() < probability; }

  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// 64-bit avalanche finalizer (SplitMix64 / Stafford variant 13).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// key = mix64(mix64(mix64(seed ^ A) ^ (run * B)) ^ (phase * C)) with fixed
/// odd constants A, B, C; the stream id is the low word of
/// (run << 16) | phase.
RngStream derive_stream(std::uint64_t base_seed, std::uint64_t run_index, std::uint64_t phase_tag);

/// Phase tags keep every stochastic feature on its own stream, so turning
/// one feature on never shifts another feature's draws.
enum class Phase : std::uint64_t {
  TextUpdate = 1,
  ImageUpdate = 2,
  Injection = 3,
  UserDraws = 4,
  Snapshot = 5,
  WishartAlpha = 6,
};

inline RngStream derive_stream(std::uint64_t base_seed, std::uint64_t run_index, Phase phase) {
  return derive_stream(base_seed, run_index, static_cast<std::uint64_t>(phase));
}

/// n points of dimension dim stored row-major.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t dim, std::size_t count) : dim_(dim), data_(dim * count, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Throws BadDistribution unless every entry is finite and >= 0 and the
/// entries sum to 1 within 1e-12.
void validate_distribution(std::span<const double> p);

/// Multinomial(n, p) counts, drawn by counting n categorical draws
/// (inverse CDF). Zero-probability categories are never selected.
std::vector<std::size_t> sample_counts(std::span<const double> p, std::size_t n, RngStream& rng);

/// Largest-remainder apportionment of n across p (ties go to the lower
/// index); counts sum to n exactly and consume no randomness.
std::vector<std::size_t> apportion_counts(std::span<const double> p, std::size_t n);

/// Gaussian sampler with a precomputed factor: draw = mean + L z.
///
/// L comes from cholesky_jitter(cov, 1e-12) on the coordinates whose
/// variance is nonzero; coordinates with an exactly zero diagonal (and hence
/// zero row/column in a PSD matrix) are held at the mean.
class GaussianSampler {
 public:
  /// Throws DimMismatch / InvalidArgument (dim > kMaxDim) / NotFactorizable.
  GaussianSampler(std::vector<double> mean, const SymMatrix& cov);

  std::size_t dim() const noexcept { return mean_.size(); }
  void draw(RngStream& rng, std::span<double> out) const;
  void draw_into(RngStream& rng, PointSet& points, std::size_t first, std::size_t count) const;

 private:
  std::vector<double> mean_;
  std::vector<std::size_t> active_;  // coordinates with nonzero variance
  Matrix factor_;                    // over active_ coordinates
};

/// Largest dimension the samplers and density kernels accept.
inline constexpr std::size_t kMaxDim = 64;

PointSet sample_gaussian(std::span<const double> mean, const SymMatrix& cov, std::size_t n,
                         RngStream& rng);

/// Sum of dof outer products of N(0, scale) draws.
SymMatrix sample_wishart(const SymMatrix& scale, std::size_t dof, RngStream& rng);

}  // namespace coevolve
