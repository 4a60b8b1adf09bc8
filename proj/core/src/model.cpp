#include "coevolve/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "coevolve/error.hpp"

namespace coevolve {

TextModel TextModel::uniform(std::size_t k) {
  return from_probs(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

TextModel TextModel::from_probs(std::vector<double> probs) {
  TextModel text;
  text.ids.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) text.ids[i] = static_cast<TextId>(i);
  text.probs = std::move(probs);
  return text;
}

ImageComponent::ImageComponent(std::vector<double> mean, SymMatrix cov)
    : mean_(std::move(mean)), cov_(std::move(cov)), ref_mean_(mean_), ref_cov_(cov_) {
  if (cov_.dim() != mean_.size()) {
    throw Error(ErrorCode::DimMismatch, "component mean/covariance dimensions differ");
  }
}

void ImageComponent::set_params(std::vector<double> mean, SymMatrix cov) {
  if (mean.size() != dim() || cov.dim() != dim()) {
    throw Error(ErrorCode::DimMismatch, "component update changes dimension");
  }
  mean_ = std::move(mean);
  cov_ = std::move(cov);
}

void SystemState::check() const {
  if (text.probs.size() != text.ids.size() || images.size() != text.probs.size()) {
    throw Error(ErrorCode::DimMismatch, "corpus, ids and image components are misaligned");
  }
  std::set<TextId> seen(text.ids.begin(), text.ids.end());
  if (seen.size() != text.ids.size()) throw Error(ErrorCode::InvalidArgument, "duplicate text id");
  double sum = 0.0;
  for (double p : text.probs) {
    if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative text probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "text probabilities sum to " + std::to_string(sum));
  }
  for (const auto& c : images)
    if (c.dim() != dim()) throw Error(ErrorCode::DimMismatch, "components differ in dimension");
}

double text_diversity(const TextModel& text) {
  double sq = 0.0;
  for (double p : text.probs) sq += p * p;
  return 1.0 - sq;
}

double image_diversity(const ImageComponent& c) { return trace_sqrt(c.cov()); }

double image_fidelity(const ImageComponent& c) {
  double sq = 0.0;
  for (std::size_t i = 0; i < c.dim(); ++i) {
    const double diff = c.mean()[i] - c.ref_mean()[i];
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

DiagnosticsRecord diagnose(const SystemState& state) {
  DiagnosticsRecord record;
  record.t = state.t;
  record.H = text_diversity(state.text);
  record.per_text.reserve(state.images.size());
  for (std::size_t i = 0; i < state.images.size(); ++i) {
    record.per_text.push_back(
        {state.text.ids[i], image_diversity(state.images[i]), image_fidelity(state.images[i])});
  }
  return record;
}

PreparedGaussian::PreparedGaussian(const ImageComponent& c) : mean_(c.mean()) {
  EigenDecomposition eig = eigen_sym(c.cov());
  const double d = static_cast<double>(c.dim());
  double log_det = 0.0;
  inv_eig_.resize(c.dim());
  for (std::size_t k = 0; k < c.dim(); ++k) {
    const double lambda = std::max(eig.values[k], kAbsEigFloor);
    inv_eig_[k] = 1.0 / lambda;
    log_det += std::log(lambda);
  }
  basis_ = std::move(eig.vectors);
  log_norm_ = -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
}

double PreparedGaussian::log_density(std::span<const double> y) const {
  const std::size_t n = mean_.size();
  double quad = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += basis_(i, k) * (y[i] - mean_[i]);
    quad += proj * proj * inv_eig_[k];
  }
  return log_norm_ - 0.5 * quad;
}

double gaussian_log_density(const ImageComponent& c, std::span<const double> y) {
  if (y.size() != c.dim()) throw Error(ErrorCode::DimMismatch, "observation dimension");
  return PreparedGaussian(c).log_density(y);
}

PosteriorEvaluator::PosteriorEvaluator(const TextModel& text,
                                       std::span<const ImageComponent> images)
    : k_(text.size()) {
  if (images.size() != k_) throw Error(ErrorCode::DimMismatch, "posterior state misaligned");
  for (std::size_t i = 0; i < k_; ++i) {
    if (text.probs[i] > 0.0) {
      active_.push_back(i);
      log_prior_.push_back(std::log(text.probs[i]));
      densities_.emplace_back(images[i]);
    }
  }
  if (active_.empty()) {
    throw Error(ErrorCode::AllUnderflow, "no text carries positive probability");
  }
  scratch_.resize(active_.size());
}

void PosteriorEvaluator::evaluate(std::span<const double> y, std::span<double> out) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < active_.size(); ++a) {
    scratch_[a] = log_prior_[a] + densities_[a].log_density(y);
    if (scratch_[a] > max_log) max_log = scratch_[a];
  }
  if (!std::isfinite(max_log)) {
    throw Error(ErrorCode::AllUnderflow, "every weighted log-density is non-finite");
  }
  double total = 0.0;
  for (std::size_t a = 0; a < active_.size(); ++a) {
    scratch_[a] = std::exp(scratch_[a] - max_log);
    total += scratch_[a];
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < active_.size(); ++a) out[active_[a]] = scratch_[a] / total;
}

std::vector<double> posterior(const TextModel& text, std::span<const ImageComponent> images,
                              std::span<const double> y) {
  PosteriorEvaluator evaluator(text, images);
  std::vector<double> z(text.size());
  evaluator.evaluate(y, z);
  return z;
}

}  // namespace coevolve
