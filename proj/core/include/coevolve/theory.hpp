#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coevolve/model.hpp"
#include "coevolve/sampling.hpp"

namespace coevolve {

/// (1 - 1/N)^t * H0: the floor on expected text diversity.
double diversity_floor(double H0, std::size_t N, std::size_t t);

struct RateApprox {
  double rate = 0.0;
  bool clamped = false;         // formula left [0, 1]
  bool outside_regime = false;  // N < 10 d, where N >> d is not credible
};

/// 1 - (d + 1) / (8 (N + 1) p_i), clamped to [0, 1].
RateApprox image_rate_approx(std::size_t d, std::size_t N, double p_i);

/// max((d + 1)(K - 1) / (8 (N + 1)) / eps, 1): lower bound on the ratio of
/// the dominant text's image decay rate to the rarest text's.
double matthew_ratio_bound(std::size_t d, std::size_t N, std::size_t K, double eps);

/// sqrt(2) C / (sqrt((N + 1) p_i) (1 - rho)). Throws DegenerateRate unless
/// 0 < rho < 1.
double frozen_text_fidelity_bound(double C, double rho, std::size_t N, double p_i);

/// 2 alpha (1 - 1/N)(eps - eps^2) / (1 - (1 - alpha)(1 - 1/N)).
double text_injection_floor(double alpha, double eps, std::size_t N);

struct AlphaEstimate {
  double alpha = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of the scalar alpha with E[W^{1/2}] = alpha I for
/// W ~ Wishart_d(I, dof): the mean of tr(W^{1/2}) / d over n_samples draws.
AlphaEstimate estimate_wishart_sqrt_alpha(std::size_t d, std::size_t dof, std::size_t n_samples,
                                          RngStream& rng);

/// alpha / sqrt((N0 - 1)(N + N0 - 1)) * tr(Sigma_user^{1/2}). Throws
/// TooFewInjected when N0 < 2.
double image_injection_diversity_floor(double alpha_wishart, std::size_t N, std::size_t N0,
                                       double tr_sqrt_user);

/// Long-run fidelity limit under user-content injection with
/// lambda = N p / (N p + N0). Returns nullopt (unbounded) when
/// N p / lambda - 1 - N p lambda <= 0.
std::optional<double> image_injection_fidelity_limit(std::size_t N, double p_i, std::size_t N0,
                                                     double tr_sigma0);

/// Minimum Euclidean distance between component means over texts with
/// p > 0. Throws TooFewComponents when fewer than two such texts exist.
double min_pairwise_mean_distance(const TextModel& text, std::span<const ImageComponent> images);

/// Named parameter bundle for evaluating any bound by name.
struct BoundInputs {
  std::size_t d = 2;
  std::size_t N = 1000;
  std::size_t K = 5;
  std::size_t t = 0;
  double p_i = 1.0;
  double H0 = 0.8;
  double C = 2.0;
  double rho = 0.5;
  double alpha_inj = 0.05;
  double eps_inj = 0.1;
  std::size_t N0 = 100;
  double tr_sigma0 = 2.0;
  double tr_sqrt_sigma_user = 2.0;
  double alpha_wishart = 1.0;
};

/// Names accepted by evaluate_bound.
std::vector<std::string> bound_names();

/// Evaluates one bound and returns (name, value) pairs; warnings such as an
/// out-of-regime rate are reported as extra pairs with value 1.
/// Unbounded results are reported as +infinity. Throws InvalidArgument for
/// an unknown name.
std::vector<std::pair<std::string, double>> evaluate_bound(std::string_view name,
                                                           const BoundInputs& in);

}  // namespace coevolve
