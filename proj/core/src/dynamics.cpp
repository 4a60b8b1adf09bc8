#include "coevolve/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "coevolve/error.hpp"

namespace coevolve {

namespace {

std::vector<double> circle_point(std::size_t d, double angle) {
  std::vector<double> mean(d, 0.0);
  mean[0] = std::cos(angle);
  if (d >= 2) mean[1] = std::sin(angle);
  return mean;
}

// Shared body of the plain and injected image updates so that N0 = 0
// consumes the model stream exactly like image_update_once.
std::vector<ImageComponent> update_components(const SystemState& state, std::size_t N,
                                              const ImageInjectionConfig* inj,
                                              RngStream& model_rng, RngStream* user_rng,
                                              bool deterministic_counts) {
  const std::size_t d = state.dim();
  const std::vector<std::size_t> counts =
      draw_text_counts(state.text, N, model_rng, deterministic_counts);
  const std::size_t n0 = inj ? inj->N0 : 0;

  std::vector<ImageComponent> next = state.images;
  for (std::size_t i = 0; i < next.size(); ++i) {
    const ImageComponent& current = state.images[i];
    PointSet model_points(d, counts[i]);
    if (counts[i] > 0) {
      GaussianSampler(current.mean(), current.cov()).draw_into(model_rng, model_points, 0,
                                                               counts[i]);
    }
    PointSet user_points(d, n0);
    if (n0 > 0) {
      const bool explicit_user = i < inj->user_means.size() && i < inj->user_covs.size();
      const std::vector<double>& user_mean =
          explicit_user ? inj->user_means[i] : current.ref_mean();
      const SymMatrix& user_cov = explicit_user ? inj->user_covs[i] : current.ref_cov();
      GaussianSampler(user_mean, user_cov).draw_into(*user_rng, user_points, 0, n0);
    }
    if (counts[i] + n0 < 2) continue;
    PooledStats stats = pooled_mean_cov(model_points, user_points);
    next[i].set_params(std::move(stats.mean), std::move(stats.cov));
  }
  return next;
}

}  // namespace

TrainingConfig TrainingConfig::constant(std::size_t N, std::size_t T,
                                        std::size_t text_updates_per_step,
                                        std::size_t image_updates_per_step) {
  TrainingConfig cfg;
  cfg.N = N;
  cfg.T = T;
  cfg.set_constant_schedule(text_updates_per_step, image_updates_per_step);
  return cfg;
}

void TrainingConfig::set_constant_schedule(std::size_t text_updates_per_step,
                                           std::size_t image_updates_per_step) {
  text_updates.assign(T, text_updates_per_step);
  image_updates.assign(T, image_updates_per_step);
}

void TrainingConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (N < 1) fail("N must be >= 1");
  if (d < 1 || d > kMaxDim) fail("d must be in [1, " + std::to_string(kMaxDim) + "]");
  if (text_updates.size() != T || image_updates.size() != T) fail("schedules must have length T");
  const bool any_image_update =
      std::any_of(image_updates.begin(), image_updates.end(), [](std::size_t n) { return n > 0; });
  if (any_image_update && N < 2) fail("N must be >= 2 when image updates are scheduled");
  if (init.K < 1) fail("K must be >= 1");
  if (!init.probs.empty()) {
    if (init.probs.size() != init.K) fail("init probs must have K entries");
    validate_distribution(init.probs);
  }
  if (!(init.cov_scale >= 0.0) || !std::isfinite(init.cov_scale)) fail("cov_scale must be >= 0");
}

void TextInjectionConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must be in [0, 1]");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be in (0, 1)");
  }
  if (!(new_component.cov_scale >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "new component cov_scale must be >= 0");
  }
}

void ImageInjectionConfig::validate(std::size_t d) const {
  if (user_means.size() != user_covs.size()) {
    throw Error(ErrorCode::InvalidArgument, "user means and covariances differ in count");
  }
  for (std::size_t i = 0; i < user_means.size(); ++i) {
    if (user_means[i].size() != d || user_covs[i].dim() != d) {
      throw Error(ErrorCode::DimMismatch, "user distribution dimension");
    }
    if (min_eig_of_difference(SymMatrix(d), user_covs[i]) < -1e-10 * (1.0 + user_covs[i].max_abs())) {
      throw Error(ErrorCode::NotPositiveSemidefinite, "user covariance");
    }
  }
}

RunStreams RunStreams::for_run(std::uint64_t base_seed, std::uint64_t run_index,
                               bool text_injection, bool image_injection) {
  RunStreams s{derive_stream(base_seed, run_index, Phase::TextUpdate),
               derive_stream(base_seed, run_index, Phase::ImageUpdate), std::nullopt,
               std::nullopt};
  if (text_injection) s.injection = derive_stream(base_seed, run_index, Phase::Injection);
  if (image_injection) s.user = derive_stream(base_seed, run_index, Phase::UserDraws);
  return s;
}

SystemState make_initial_state(const TrainingConfig& cfg) {
  cfg.validate();
  SystemState state;
  state.text = cfg.init.probs.empty() ? TextModel::uniform(cfg.init.K)
                                      : TextModel::from_probs(cfg.init.probs);
  state.images.reserve(cfg.init.K);
  for (std::size_t i = 0; i < cfg.init.K; ++i) {
    const double angle =
        2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(cfg.init.K);
    state.images.emplace_back(circle_point(cfg.d, angle),
                              SymMatrix::scaled_identity(cfg.d, cfg.init.cov_scale));
  }
  return state;
}

std::vector<std::size_t> draw_text_counts(const TextModel& text, std::size_t N, RngStream& rng,
                                          bool deterministic) {
  return deterministic ? apportion_counts(text.probs, N) : sample_counts(text.probs, N, rng);
}

TextModel text_update_once(SystemState& state, std::size_t N, RngStream& rng,
                           bool deterministic_counts) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "text update needs N >= 1");
  const std::size_t k = state.text.size();
  const std::size_t d = state.dim();
  const std::vector<std::size_t> counts =
      draw_text_counts(state.text, N, rng, deterministic_counts);

  PosteriorEvaluator evaluator(state.text, state.images);
  std::vector<double> accum(k, 0.0);
  std::vector<double> z(k);
  std::vector<double> y(d);
  for (std::size_t i = 0; i < k; ++i) {
    if (counts[i] == 0) continue;
    const GaussianSampler sampler(state.images[i].mean(), state.images[i].cov());
    for (std::size_t j = 0; j < counts[i]; ++j) {
      sampler.draw(rng, y);
      evaluator.evaluate(y, z);
      for (std::size_t m = 0; m < k; ++m) accum[m] += z[m];
    }
  }

  TextModel next = state.text;
  double total = 0.0;
  for (std::size_t m = 0; m < k; ++m) {
    next.probs[m] = accum[m] / static_cast<double>(N);
    total += next.probs[m];
  }
  if (std::abs(total - 1.0) > 1e-9) ++state.mass_drift_warnings;
  for (double& p : next.probs) p /= total;
  return next;
}

std::vector<ImageComponent> image_update_once(const SystemState& state, std::size_t N,
                                              RngStream& rng, bool deterministic_counts) {
  if (N < 2) throw Error(ErrorCode::InvalidArgument, "image update needs N >= 2");
  return update_components(state, N, nullptr, rng, nullptr, deterministic_counts);
}

std::vector<ImageComponent> image_update_with_injection(const SystemState& state, std::size_t N,
                                                        const ImageInjectionConfig& inj,
                                                        RngStream& model_rng, RngStream& user_rng,
                                                        bool deterministic_counts) {
  return update_components(state, N, &inj, model_rng, &user_rng, deterministic_counts);
}

PooledStats pooled_mean_cov(const PointSet& first, const PointSet& second) {
  const std::size_t d = std::max(first.dim(), second.dim());
  if ((!first.empty() && first.dim() != d) || (!second.empty() && second.dim() != d)) {
    throw Error(ErrorCode::DimMismatch, "pooled point sets differ in dimension");
  }
  const std::size_t n = first.size() + second.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "pooled statistics need >= 2 points");

  PooledStats stats{std::vector<double>(d, 0.0), SymMatrix(d)};
  for (const PointSet* set : {&first, &second})
    for (std::size_t j = 0; j < set->size(); ++j)
      for (std::size_t a = 0; a < d; ++a) stats.mean[a] += set->row(j)[a];
  for (double& m : stats.mean) m /= static_cast<double>(n);

  std::vector<double> centered(d);
  for (const PointSet* set : {&first, &second})
    for (std::size_t j = 0; j < set->size(); ++j) {
      for (std::size_t a = 0; a < d; ++a) centered[a] = set->row(j)[a] - stats.mean[a];
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) stats.cov(a, b) += centered[a] * centered[b];
    }
  const double divisor = static_cast<double>(n - 1);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      stats.cov(a, b) /= divisor;
      stats.cov(b, a) = stats.cov(a, b);
    }
  return stats;
}

void inject_text(SystemState& state, const TextInjectionConfig& inj, RngStream& rng) {
  const std::size_t d = state.dim();
  for (double& p : state.text.probs) p *= 1.0 - inj.epsilon;
  const TextId next_id =
      state.text.ids.empty() ? 0 : *std::max_element(state.text.ids.begin(), state.text.ids.end()) + 1;
  state.text.probs.push_back(inj.epsilon);
  state.text.ids.push_back(next_id);
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  state.images.emplace_back(circle_point(d, angle),
                            SymMatrix::scaled_identity(d, inj.new_component.cov_scale));
}

SystemState macro_step(SystemState state, const TrainingConfig& cfg, std::size_t t,
                       RunStreams& streams, const ImageInjectionConfig* image_injection) {
  if (t >= cfg.T) throw Error(ErrorCode::InvalidArgument, "macro step index beyond T");

  for (std::size_t m = 0; m < cfg.text_updates[t]; ++m) {
    state.text = text_update_once(state, cfg.N, streams.text, cfg.deterministic_counts);
  }
  for (std::size_t n = 0; n < cfg.image_updates[t]; ++n) {
    if (image_injection) {
      if (!streams.user) throw Error(ErrorCode::InvalidArgument, "user-draw stream missing");
      state.images = image_update_with_injection(state, cfg.N, *image_injection, streams.image,
                                                 *streams.user, cfg.deterministic_counts);
    } else {
      state.images = image_update_once(state, cfg.N, streams.image, cfg.deterministic_counts);
    }
  }
  state.t = t + 1;
  return state;
}

SystemState macro_step_with_text_injection(SystemState state, const TrainingConfig& cfg,
                                           const TextInjectionConfig& inj, std::size_t t,
                                           RunStreams& streams,
                                           const ImageInjectionConfig* image_injection) {
  if (!streams.injection) throw Error(ErrorCode::InvalidArgument, "injection stream missing");
  if (streams.injection->bernoulli(inj.alpha)) inject_text(state, inj, *streams.injection);
  return macro_step(std::move(state), cfg, t, streams, image_injection);
}

Trajectory run_trajectory(const TrainingConfig& cfg,
                          const std::optional<TextInjectionConfig>& text_injection,
                          const std::optional<ImageInjectionConfig>& image_injection,
                          std::uint64_t base_seed, std::uint64_t run_index,
                          const StateObserver& observer) {
  cfg.validate();
  if (text_injection) text_injection->validate();
  if (image_injection) image_injection->validate(cfg.d);

  SystemState state = make_initial_state(cfg);
  RunStreams streams = RunStreams::for_run(base_seed, run_index, text_injection.has_value(),
                                           image_injection.has_value());
  const ImageInjectionConfig* image_inj = image_injection ? &*image_injection : nullptr;

  Trajectory trajectory;
  trajectory.records.reserve(cfg.T + 1);
  trajectory.records.push_back(diagnose(state));
  if (observer) observer(state);

  for (std::size_t t = 0; t < cfg.T; ++t) {
    try {
      // Copies keep the last good state intact if the step throws.
      state = text_injection
                  ? macro_step_with_text_injection(state, cfg, *text_injection, t, streams,
                                                   image_inj)
                  : macro_step(state, cfg, t, streams, image_inj);
      trajectory.records.push_back(diagnose(state));
    } catch (const Error& e) {
      trajectory.aborted = true;
      trajectory.abort_reason = "t=" + std::to_string(t + 1) + ": " + e.what();
      break;
    }
    if (observer) observer(state);
  }
  trajectory.mass_drift_warnings = state.mass_drift_warnings;
  trajectory.injections = state.text.size() - cfg.init.K;
  return trajectory;
}

}  // namespace coevolve
