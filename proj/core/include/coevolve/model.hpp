#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coevolve/linalg.hpp"

namespace coevolve {

using TextId = std::int64_t;

/// Eigenvalue floor applied inside density evaluation only. Diagnostics use
/// the raw covariance so D_t keeps decaying toward zero.
inline constexpr double kAbsEigFloor = 1e-250;

/// Probability vector over a growable corpus of texts with stable ids.
struct TextModel {
  std::vector<double> probs;
  std::vector<TextId> ids;

  std::size_t size() const noexcept { return probs.size(); }
  /// Uniform distribution over ids 0..k-1.
  static TextModel uniform(std::size_t k);
  static TextModel from_probs(std::vector<double> probs);
};

/// Gaussian image model for one text. The reference mean and covariance are
/// fixed at construction and serve as the fidelity reference and the
/// default user-content distribution.
class ImageComponent {
 public:
  ImageComponent(std::vector<double> mean, SymMatrix cov);

  std::size_t dim() const noexcept { return mean_.size(); }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const SymMatrix& cov() const noexcept { return cov_; }
  const std::vector<double>& ref_mean() const noexcept { return ref_mean_; }
  const SymMatrix& ref_cov() const noexcept { return ref_cov_; }

  void set_params(std::vector<double> mean, SymMatrix cov);

 private:
  std::vector<double> mean_;
  SymMatrix cov_;
  std::vector<double> ref_mean_;
  SymMatrix ref_cov_;
};

struct SystemState {
  TextModel text;
  std::vector<ImageComponent> images;  // aligned with text.ids
  std::size_t t = 0;
  /// Number of text updates whose pre-normalization mass drifted by > 1e-9.
  std::size_t mass_drift_warnings = 0;

  std::size_t dim() const { return images.empty() ? 0 : images.front().dim(); }
  /// Throws InvalidArgument / DimMismatch when the alignment or
  /// probability invariants are broken.
  void check() const;
};

struct TextDiagnostics {
  TextId id = 0;
  double D = 0.0;
  double F = 0.0;
};

struct DiagnosticsRecord {
  std::size_t t = 0;
  double H = 0.0;
  std::vector<TextDiagnostics> per_text;
};

/// 1 - sum p_i^2.
double text_diversity(const TextModel& text);
/// tr(cov^{1/2}) on the unfloored covariance.
double image_diversity(const ImageComponent& c);
/// ||mean - ref_mean||_2.
double image_fidelity(const ImageComponent& c);

DiagnosticsRecord diagnose(const SystemState& state);

/// Log-density of one Gaussian with the covariance eigenvalues floored at
/// kAbsEigFloor, evaluated through its eigendecomposition.
class PreparedGaussian {
 public:
  explicit PreparedGaussian(const ImageComponent& c);

  double log_density(std::span<const double> y) const;

 private:
  std::vector<double> mean_;
  Matrix basis_;                  // eigenvectors as columns
  std::vector<double> inv_eig_;   // 1 / floored eigenvalue
  double log_norm_ = 0.0;
};

double gaussian_log_density(const ImageComponent& c, std::span<const double> y);

/// Posterior Z_i(y) = p_i q(y|x_i) / sum_k p_k q(y|x_k) via log-sum-exp.
/// Components with p_i = 0 get exactly 0. Throws AllUnderflow when no
/// weighted log-density is finite.
std::vector<double> posterior(const TextModel& text, std::span<const ImageComponent> images,
                              std::span<const double> y);

/// Reusable posterior evaluator for many observations against a fixed state.
class PosteriorEvaluator {
 public:
  PosteriorEvaluator(const TextModel& text, std::span<const ImageComponent> images);

  /// Writes Z(y) into out (length = corpus size).
  void evaluate(std::span<const double> y, std::span<double> out);

 private:
  std::size_t k_;
  std::vector<std::size_t> active_;  // indices with p > 0
  std::vector<double> log_prior_;    // per active index
  std::vector<PreparedGaussian> densities_;
  std::vector<double> scratch_;
};

}  // namespace coevolve
