#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coevolve/model.hpp"
#include "coevolve/sampling.hpp"

namespace coevolve {

/// Initial state: K texts with the given probabilities (uniform when empty),
/// component means evenly spaced on the unit circle in the first two
/// coordinates starting at (1, 0), covariances cov_scale * I.
struct InitSpec {
  std::size_t K = 5;
  std::vector<double> probs;
  double cov_scale = 1.0;
};

struct TrainingConfig {
  std::size_t N = 1000;
  std::size_t T = 1000;
  std::vector<std::size_t> text_updates;   // M_t, length T
  std::vector<std::size_t> image_updates;  // N_t, length T
  /// Replace multinomial text draws by largest-remainder counts of N p_i.
  bool deterministic_counts = false;
  std::size_t d = 2;
  InitSpec init;

  static TrainingConfig constant(std::size_t N, std::size_t T, std::size_t text_updates_per_step,
                                 std::size_t image_updates_per_step);
  /// Rebuilds the schedules as constants of the given values for length T.
  void set_constant_schedule(std::size_t text_updates_per_step,
                             std::size_t image_updates_per_step);
  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;
};

/// New texts get a mean at a uniformly random angle on the unit circle and
/// covariance cov_scale * I.
struct NewComponentSpec {
  double cov_scale = 1.0;
};

struct TextInjectionConfig {
  double alpha = 0.05;
  double epsilon = 0.1;
  NewComponentSpec new_component;

  void validate() const;
};

/// User content for text i is N(user_means[i], user_covs[i]). When the lists
/// are empty (or shorter than the corpus) the component's reference mean and
/// covariance are used, i.e. the user distribution mirrors the initial model.
struct ImageInjectionConfig {
  std::size_t N0 = 100;
  std::vector<std::vector<double>> user_means;
  std::vector<SymMatrix> user_covs;

  void validate(std::size_t d) const;
};

/// One stream per stochastic feature of a run.
struct RunStreams {
  RngStream text;
  RngStream image;
  std::optional<RngStream> injection;
  std::optional<RngStream> user;

  static RunStreams for_run(std::uint64_t base_seed, std::uint64_t run_index,
                            bool text_injection, bool image_injection);
};

SystemState make_initial_state(const TrainingConfig& cfg);

/// Draws the per-text counts for N samples from the current text model.
std::vector<std::size_t> draw_text_counts(const TextModel& text, std::size_t N, RngStream& rng,
                                          bool deterministic);

/// One text-model update: N texts from p, one image each from the (fixed)
/// components, p <- average posterior. Renormalizes; bumps
/// state.mass_drift_warnings when the average drifted by more than 1e-9.
TextModel text_update_once(SystemState& state, std::size_t N, RngStream& rng,
                           bool deterministic_counts = false);

/// One image-model update: N texts from p, N_i images per text from its
/// component, then sample mean and unbiased covariance. Components with
/// N_i <= 1 are left unchanged.
std::vector<ImageComponent> image_update_once(const SystemState& state, std::size_t N,
                                              RngStream& rng, bool deterministic_counts = false);

/// Image update with N0 user-content images pooled into every component.
/// Model images come from `model_rng`, user images from `user_rng` (for
/// text i in corpus order, N0 draws each). Components with N_i + N0 <= 1 are
/// left unchanged.
std::vector<ImageComponent> image_update_with_injection(const SystemState& state, std::size_t N,
                                                        const ImageInjectionConfig& inj,
                                                        RngStream& model_rng, RngStream& user_rng,
                                                        bool deterministic_counts = false);

/// Sample mean and covariance (divisor n - 1) over the union of two point
/// sets, computed directly from the pooled points.
struct PooledStats {
  std::vector<double> mean;
  SymMatrix cov;
};
PooledStats pooled_mean_cov(const PointSet& first, const PointSet& second);

/// Scales existing mass by (1 - epsilon) and appends a text with mass epsilon
/// and a fresh component drawn from `rng`.
void inject_text(SystemState& state, const TextInjectionConfig& inj, RngStream& rng);

/// Macro step t: M_t text updates against the step's starting image model,
/// then N_t image updates sampling texts from the updated p_t.
SystemState macro_step(SystemState state, const TrainingConfig& cfg, std::size_t t,
                       RunStreams& streams,
                       const ImageInjectionConfig* image_injection = nullptr);

/// One Bernoulli(alpha) draw on the injection stream; on success the text is
/// injected before the standard macro step body.
SystemState macro_step_with_text_injection(SystemState state, const TrainingConfig& cfg,
                                           const TextInjectionConfig& inj, std::size_t t,
                                           RunStreams& streams,
                                           const ImageInjectionConfig* image_injection = nullptr);

struct Trajectory {
  std::vector<DiagnosticsRecord> records;  // t = 0..T, or a prefix when aborted
  bool aborted = false;
  std::string abort_reason;
  std::size_t mass_drift_warnings = 0;
  std::size_t injections = 0;
};

/// Called with the state after initialization (t = 0) and after each step.
using StateObserver = std::function<void(const SystemState&)>;

Trajectory run_trajectory(const TrainingConfig& cfg,
                          const std::optional<TextInjectionConfig>& text_injection,
                          const std::optional<ImageInjectionConfig>& image_injection,
                          std::uint64_t base_seed, std::uint64_t run_index,
                          const StateObserver& observer = {});

}  // namespace coevolve
