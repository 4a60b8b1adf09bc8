#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coevolve/dynamics.hpp"
#include "coevolve/model.hpp"

namespace coevolve {

enum class Metric { H, D, F };
std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

enum class SweepParam { None, CovScale, ImageUpdates, InjectionFraction, InjectedCount };
std::string_view sweep_param_name(SweepParam p);
std::optional<SweepParam> parse_sweep_param(std::string_view name);

struct Sweep {
  SweepParam param = SweepParam::None;
  std::vector<double> values{0.0};
};

enum class OverlayKind {
  DiversityFloor,
  ImageRate,
  TextInjectionFloor,
  ImageInjectionDiversityFloor,
  ImageInjectionFidelityLimit,
};
std::string_view overlay_name(OverlayKind k);

enum class AppendixVariant { FrozenImage, FrozenText, Both, TextInjection, ImageInjection };
std::string_view appendix_variant_name(AppendixVariant v);
std::optional<AppendixVariant> parse_appendix_variant(std::string_view name);

struct PlotSpec {
  Metric metric = Metric::H;
  bool log_y = true;
  std::string title;
};

/// Inclusive window of macro steps used for log-linear rate fits.
struct FitWindow {
  std::size_t t_lo = 10;
  std::size_t t_hi = 500;
};

struct ExperimentPreset {
  std::string name;
  /// N, T, d, init and deterministic_counts; schedules are rebuilt from the
  /// per-step constants below by training_config().
  TrainingConfig base;
  std::size_t text_updates_per_step = 1;
  std::size_t image_updates_per_step = 0;
  std::optional<TextInjectionConfig> text_injection;
  std::optional<ImageInjectionConfig> image_injection;
  Sweep sweep;
  std::size_t runs = 20;
  std::vector<Metric> metrics;
  std::vector<OverlayKind> overlays;
  std::vector<PlotSpec> plots;
  std::vector<std::size_t> snapshot_steps;
  std::size_t snapshot_samples = 200;
  FitWindow fit;
  /// Monte Carlo draws behind the Wishart-scalar overlay.
  std::size_t alpha_samples = 10000;

  TrainingConfig training_config() const;
  /// Throws RangeError when sweeps are empty, runs is 0 or a sweep value is
  /// invalid for its parameter.
  void validate() const;
};

/// Desk-scale presets (20 runs, shortened T); paper_scale restores 100 runs
/// and the full horizons.
ExperimentPreset preset_fig3(bool paper_scale = false);
ExperimentPreset preset_fig4(bool paper_scale = false);
ExperimentPreset preset_fig5(bool paper_scale = false);
ExperimentPreset preset_fig6(bool paper_scale = false);
ExperimentPreset preset_fig7(bool paper_scale = false);
/// fig7 with largest-remainder counts, the setting of the fidelity limit.
ExperimentPreset preset_fig7_deterministic(bool paper_scale = false);
ExperimentPreset preset_appendixC(AppendixVariant variant);
/// Neutral starting point for fully user-specified configs.
ExperimentPreset preset_custom();

std::vector<std::string> preset_names();
std::optional<ExperimentPreset> preset_by_name(std::string_view name, bool paper_scale = false,
                                               AppendixVariant variant = AppendixVariant::Both);

/// Configuration for one sweep value, with the swept parameter applied.
/// InjectionFraction = 0 disables text injection (the closed system).
struct SweepPoint {
  TrainingConfig cfg;
  std::optional<TextInjectionConfig> text_injection;
  std::optional<ImageInjectionConfig> image_injection;
};
SweepPoint apply_sweep(const ExperimentPreset& preset, double value);

struct AggregateSeries {
  Metric metric = Metric::H;
  std::optional<TextId> text_id;  // set for D and F
  SweepParam param = SweepParam::None;
  double sweep_value = 0.0;
  std::vector<double> mean;            // length T + 1
  std::vector<double> standard_error;  // length T + 1
  std::vector<std::size_t> runs;       // runs contributing at each t
};

struct OverlaySeries {
  OverlayKind kind = OverlayKind::DiversityFloor;
  Metric metric = Metric::H;
  std::optional<TextId> text_id;
  SweepParam param = SweepParam::None;
  double sweep_value = 0.0;
  std::vector<double> values;  // length T + 1
};

struct SnapshotText {
  TextId id = 0;
  std::vector<double> mean;
  SymMatrix cov;
  PointSet samples;
};

struct Snapshot {
  std::size_t t = 0;
  std::vector<double> probs;
  std::vector<SnapshotText> per_text;
};

struct AbortedRun {
  double sweep_value = 0.0;
  std::size_t run_index = 0;
  std::string reason;
};

struct RunMetadata {
  std::size_t total_runs = 0;
  std::vector<AbortedRun> aborted;
  std::size_t mass_drift_warnings = 0;
  std::size_t injections = 0;
};

struct ExperimentResult {
  std::vector<AggregateSeries> series;
  std::vector<OverlaySeries> overlays;
  std::vector<Snapshot> snapshots;
  RunMetadata metadata;
};

/// Runs every (sweep value, run index) trajectory on `workers` threads and
/// aggregates in run-index order, so results are identical for any worker
/// count. Run r of every sweep value uses the streams of run index r.
/// Aborted runs are excluded from the averages and listed in the metadata.
ExperimentResult run_experiment(const ExperimentPreset& preset, std::uint64_t base_seed,
                                std::size_t workers = 1);

const AggregateSeries* find_series(const ExperimentResult& result, Metric metric,
                                   double sweep_value, std::optional<TextId> text_id = {});

struct RateFit {
  double slope = 0.0;  // d ln(mean) / dt
  double rate = 0.0;   // exp(slope)
  std::size_t points = 0;
};

/// Ordinary least squares of ln(mean_t) on t over the window, skipping
/// steps with no runs or a nonpositive mean. Throws EmptySeries with fewer
/// than two usable points.
RateFit fit_log_rate(const AggregateSeries& series, FitWindow window);

}  // namespace coevolve
