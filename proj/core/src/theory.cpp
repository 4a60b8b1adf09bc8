#include "coevolve/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coevolve/error.hpp"

namespace coevolve {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

double diversity_floor(double H0, std::size_t N, std::size_t t) {
  require(H0 >= 0.0 && H0 <= 1.0, "H0 must be in [0, 1]");
  require(N >= 2, "N must be >= 2");
  return std::pow(1.0 - 1.0 / static_cast<double>(N), static_cast<double>(t)) * H0;
}

RateApprox image_rate_approx(std::size_t d, std::size_t N, double p_i) {
  require(p_i > 0.0, "p_i must be > 0");
  const double raw = 1.0 - static_cast<double>(d + 1) /
                               (8.0 * static_cast<double>(N + 1) * p_i);
  RateApprox out;
  out.rate = std::clamp(raw, 0.0, 1.0);
  out.clamped = out.rate != raw;
  out.outside_regime = N < 10 * d;
  return out;
}

double matthew_ratio_bound(std::size_t d, std::size_t N, std::size_t K, double eps) {
  require(eps > 0.0, "eps must be > 0");
  const double prefactor =
      static_cast<double>((d + 1) * (K - 1)) / (8.0 * static_cast<double>(N + 1));
  return std::max(prefactor / eps, 1.0);
}

double frozen_text_fidelity_bound(double C, double rho, std::size_t N, double p_i) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::DegenerateRate, "rho must lie in (0, 1)");
  }
  require(p_i > 0.0, "p_i must be > 0");
  return std::sqrt(2.0) * C / (std::sqrt(static_cast<double>(N + 1) * p_i) * (1.0 - rho));
}

double text_injection_floor(double alpha, double eps, std::size_t N) {
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0, 1]");
  require(eps >= 0.0 && eps <= 1.0, "eps must be in [0, 1]");
  require(N >= 2, "N must be >= 2");
  const double keep = 1.0 - 1.0 / static_cast<double>(N);
  return 2.0 * alpha * keep * (eps - eps * eps) / (1.0 - (1.0 - alpha) * keep);
}

AlphaEstimate estimate_wishart_sqrt_alpha(std::size_t d, std::size_t dof, std::size_t n_samples,
                                          RngStream& rng) {
  require(d >= 1, "d must be >= 1");
  require(dof >= 1, "dof must be >= 1");
  require(n_samples >= 1000, "need at least 1000 samples");
  const SymMatrix scale = SymMatrix::identity(d);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const double x = trace_sqrt(sample_wishart(scale, dof, rng)) / static_cast<double>(d);
    const double delta = x - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (x - mean);
  }
  const double variance = m2 / static_cast<double>(n_samples - 1);
  return {mean, std::sqrt(variance / static_cast<double>(n_samples))};
}

double image_injection_diversity_floor(double alpha_wishart, std::size_t N, std::size_t N0,
                                       double tr_sqrt_user) {
  if (N0 < 2) throw Error(ErrorCode::TooFewInjected, "the floor needs N0 >= 2");
  const double denom = std::sqrt(static_cast<double>(N0 - 1) * static_cast<double>(N + N0 - 1));
  return alpha_wishart * tr_sqrt_user / denom;
}

std::optional<double> image_injection_fidelity_limit(std::size_t N, double p_i, std::size_t N0,
                                                     double tr_sigma0) {
  require(N0 >= 1, "N0 must be >= 1");
  require(p_i > 0.0, "p_i must be > 0");
  require(tr_sigma0 >= 0.0, "tr(Sigma0) must be >= 0");
  const double np = static_cast<double>(N) * p_i;
  const double lambda = np / (np + static_cast<double>(N0));
  const double numerator = 1.0 - lambda / np;
  const double denominator = np / lambda - 1.0 - np * lambda;
  if (!(denominator > 0.0)) return std::nullopt;
  return std::sqrt(numerator / denominator * tr_sigma0);
}

double min_pairwise_mean_distance(const TextModel& text, std::span<const ImageComponent> images) {
  std::vector<const ImageComponent*> live;
  for (std::size_t i = 0; i < images.size() && i < text.size(); ++i)
    if (text.probs[i] > 0.0) live.push_back(&images[i]);
  if (live.size() < 2) {
    throw Error(ErrorCode::TooFewComponents, "need two texts with positive probability");
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < live.size(); ++a)
    for (std::size_t b = a + 1; b < live.size(); ++b) {
      double sq = 0.0;
      for (std::size_t k = 0; k < live[a]->dim(); ++k) {
        const double diff = live[a]->mean()[k] - live[b]->mean()[k];
        sq += diff * diff;
      }
      best = std::min(best, std::sqrt(sq));
    }
  return best;
}

std::vector<std::string> bound_names() {
  return {"diversity-floor",
          "image-rate",
          "matthew-ratio",
          "frozen-text-fidelity",
          "text-injection-floor",
          "image-injection-diversity-floor",
          "image-injection-fidelity-limit"};
}

std::vector<std::pair<std::string, double>> evaluate_bound(std::string_view name,
                                                           const BoundInputs& in) {
  if (name == "diversity-floor") return {{"diversity_floor", diversity_floor(in.H0, in.N, in.t)}};
  if (name == "image-rate") {
    const RateApprox r = image_rate_approx(in.d, in.N, in.p_i);
    std::vector<std::pair<std::string, double>> out{{"image_rate", r.rate}};
    if (r.clamped) out.emplace_back("warning_clamped", 1.0);
    if (r.outside_regime) out.emplace_back("warning_outside_regime", 1.0);
    return out;
  }
  if (name == "matthew-ratio") {
    return {{"matthew_ratio_bound", matthew_ratio_bound(in.d, in.N, in.K, in.eps_inj)}};
  }
  if (name == "frozen-text-fidelity") {
    return {{"frozen_text_fidelity_bound", frozen_text_fidelity_bound(in.C, in.rho, in.N, in.p_i)}};
  }
  if (name == "text-injection-floor") {
    return {{"text_injection_floor", text_injection_floor(in.alpha_inj, in.eps_inj, in.N)}};
  }
  if (name == "image-injection-diversity-floor") {
    return {{"image_injection_diversity_floor",
             image_injection_diversity_floor(in.alpha_wishart, in.N, in.N0,
                                             in.tr_sqrt_sigma_user)}};
  }
  if (name == "image-injection-fidelity-limit") {
    const auto limit = image_injection_fidelity_limit(in.N, in.p_i, in.N0, in.tr_sigma0);
    return {{"image_injection_fidelity_limit",
             limit.value_or(std::numeric_limits<double>::infinity())}};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown bound '" + std::string(name) + "'");
}

}  // namespace coevolve
