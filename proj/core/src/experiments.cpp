#include "coevolve/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "coevolve/error.hpp"
#include "coevolve/theory.hpp"

namespace coevolve {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_count(double v, double max) {
  return std::isfinite(v) && v >= 0.0 && v <= max && v == std::floor(v);
}

ExperimentPreset base_preset(std::string name, std::size_t T, std::size_t text_updates,
                             std::size_t image_updates) {
  ExperimentPreset p;
  p.name = std::move(name);
  p.base.N = 1000;
  p.base.T = T;
  p.base.d = 2;
  p.base.init.K = 5;
  p.base.init.cov_scale = 1.0;
  p.text_updates_per_step = text_updates;
  p.image_updates_per_step = image_updates;
  return p;
}

void scale_up(ExperimentPreset& p, bool paper_scale, std::size_t full_T) {
  if (!paper_scale) return;
  p.runs = 100;
  p.base.T = full_T;
  p.fit.t_hi = std::min(p.fit.t_hi, full_T);
}

// Everything a finished run contributes to the aggregate; the full
// trajectory is dropped as soon as the run ends.
struct RunSummary {
  bool aborted = false;
  std::string reason;
  std::size_t mass_drift_warnings = 0;
  std::size_t injections = 0;
  std::vector<double> H;
  std::map<TextId, std::vector<double>> D;  // NaN where the text is absent
  std::map<TextId, std::vector<double>> F;
  std::vector<Snapshot> snapshots;
};

bool wants(const ExperimentPreset& p, Metric m) {
  return std::find(p.metrics.begin(), p.metrics.end(), m) != p.metrics.end();
}

RunSummary summarize(const ExperimentPreset& preset, const Trajectory& traj, std::size_t T) {
  RunSummary s;
  s.aborted = traj.aborted;
  s.reason = traj.abort_reason;
  s.mass_drift_warnings = traj.mass_drift_warnings;
  s.injections = traj.injections;
  if (traj.aborted) return s;

  const bool want_h = wants(preset, Metric::H);
  const bool want_d = wants(preset, Metric::D);
  const bool want_f = wants(preset, Metric::F);
  if (want_h) s.H.reserve(T + 1);
  for (const DiagnosticsRecord& rec : traj.records) {
    if (want_h) s.H.push_back(rec.H);
    for (const TextDiagnostics& td : rec.per_text) {
      if (want_d) {
        auto& v = s.D.try_emplace(td.id, T + 1, kNaN).first->second;
        v[rec.t] = td.D;
      }
      if (want_f) {
        auto& v = s.F.try_emplace(td.id, T + 1, kNaN).first->second;
        v[rec.t] = td.F;
      }
    }
  }
  return s;
}

Snapshot take_snapshot(const SystemState& state, std::size_t samples, RngStream& rng) {
  Snapshot snap;
  snap.t = state.t;
  snap.probs = state.text.probs;
  snap.per_text.reserve(state.images.size());
  for (std::size_t i = 0; i < state.images.size(); ++i) {
    const ImageComponent& c = state.images[i];
    snap.per_text.push_back(
        {state.text.ids[i], c.mean(), c.cov(), sample_gaussian(c.mean(), c.cov(), samples, rng)});
  }
  return snap;
}

// Mean and standard error per step over the runs that have a finite value
// there, folded in run-index order.
void fold(const std::vector<const std::vector<double>*>& runs, std::size_t T,
          AggregateSeries& out) {
  out.mean.assign(T + 1, kNaN);
  out.standard_error.assign(T + 1, 0.0);
  out.runs.assign(T + 1, 0);
  for (std::size_t t = 0; t <= T; ++t) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto* r : runs) {
      if (r && t < r->size() && std::isfinite((*r)[t])) {
        sum += (*r)[t];
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto* r : runs) {
      if (r && t < r->size() && std::isfinite((*r)[t])) {
        const double dev = (*r)[t] - mean;
        ss += dev * dev;
      }
    }
    out.mean[t] = mean;
    out.runs[t] = n;
    out.standard_error[t] =
        n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  }
}

void aggregate_per_text(const std::vector<RunSummary>& runs, std::size_t first, std::size_t count,
                        Metric metric, const ExperimentPreset& preset, double value,
                        std::size_t T, std::vector<AggregateSeries>& out) {
  auto table = [metric](const RunSummary& r) -> const std::map<TextId, std::vector<double>>& {
    return metric == Metric::D ? r.D : r.F;
  };
  std::vector<TextId> ids;
  for (std::size_t r = first; r < first + count; ++r) {
    if (runs[r].aborted) continue;
    for (const auto& [id, series] : table(runs[r])) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  for (TextId id : ids) {
    std::vector<const std::vector<double>*> cols;
    for (std::size_t r = first; r < first + count; ++r) {
      if (runs[r].aborted) continue;
      const auto& tab = table(runs[r]);
      auto it = tab.find(id);
      cols.push_back(it == tab.end() ? nullptr : &it->second);
    }
    AggregateSeries s;
    s.metric = metric;
    s.text_id = id;
    s.param = preset.sweep.param;
    s.sweep_value = value;
    fold(cols, T, s);
    out.push_back(std::move(s));
  }
}

OverlaySeries make_overlay(OverlayKind kind, Metric metric, std::optional<TextId> id,
                           const ExperimentPreset& preset, double value, std::size_t T) {
  OverlaySeries o;
  o.kind = kind;
  o.metric = metric;
  o.text_id = id;
  o.param = preset.sweep.param;
  o.sweep_value = value;
  o.values.assign(T + 1, 0.0);
  return o;
}

void add_overlays(const ExperimentPreset& preset, std::size_t sweep_index, double value,
                  std::uint64_t seed, std::vector<OverlaySeries>& out) {
  const SweepPoint point = apply_sweep(preset, value);
  const TrainingConfig& cfg = point.cfg;
  const std::size_t T = cfg.T;
  const SystemState init = make_initial_state(cfg);

  for (OverlayKind kind : preset.overlays) {
    switch (kind) {
      case OverlayKind::DiversityFloor: {
        OverlaySeries o = make_overlay(kind, Metric::H, {}, preset, value, T);
        const double H0 = text_diversity(init.text);
        for (std::size_t t = 0; t <= T; ++t) o.values[t] = diversity_floor(H0, cfg.N, t);
        out.push_back(std::move(o));
        break;
      }
      case OverlayKind::ImageRate: {
        for (std::size_t i = 0; i < init.images.size(); ++i) {
          const double p = init.text.probs[i];
          if (p <= 0.0) continue;
          OverlaySeries o = make_overlay(kind, Metric::D, init.text.ids[i], preset, value, T);
          const double D0 = image_diversity(init.images[i]);
          const double rate = image_rate_approx(cfg.d, cfg.N, p).rate;
          for (std::size_t t = 0; t <= T; ++t) {
            o.values[t] = D0 * std::pow(rate, static_cast<double>(t));
          }
          out.push_back(std::move(o));
        }
        break;
      }
      case OverlayKind::TextInjectionFloor: {
        if (!point.text_injection) break;
        OverlaySeries o = make_overlay(kind, Metric::H, {}, preset, value, T);
        std::fill(o.values.begin(), o.values.end(),
                  text_injection_floor(point.text_injection->alpha,
                                       point.text_injection->epsilon, cfg.N));
        out.push_back(std::move(o));
        break;
      }
      case OverlayKind::ImageInjectionDiversityFloor: {
        if (!point.image_injection || point.image_injection->N0 < 2) break;
        const std::size_t N0 = point.image_injection->N0;
        RngStream rng = derive_stream(seed, sweep_index, Phase::WishartAlpha);
        const double alpha =
            estimate_wishart_sqrt_alpha(cfg.d, N0 - 1, preset.alpha_samples, rng).alpha;
        for (std::size_t i = 0; i < init.images.size(); ++i) {
          const auto& inj = *point.image_injection;
          const SymMatrix& user_cov =
              i < inj.user_covs.size() ? inj.user_covs[i] : init.images[i].ref_cov();
          OverlaySeries o = make_overlay(kind, Metric::D, init.text.ids[i], preset, value, T);
          std::fill(o.values.begin(), o.values.end(),
                    image_injection_diversity_floor(alpha, cfg.N, N0, trace_sqrt(user_cov)));
          out.push_back(std::move(o));
        }
        break;
      }
      case OverlayKind::ImageInjectionFidelityLimit: {
        if (!point.image_injection || point.image_injection->N0 < 1) break;
        const auto& inj = *point.image_injection;
        for (std::size_t i = 0; i < init.images.size(); ++i) {
          const SymMatrix& user_cov =
              i < inj.user_covs.size() ? inj.user_covs[i] : init.images[i].ref_cov();
          const auto limit = image_injection_fidelity_limit(cfg.N, init.text.probs[i], inj.N0,
                                                            user_cov.trace());
          if (!limit) continue;
          OverlaySeries o = make_overlay(kind, Metric::F, init.text.ids[i], preset, value, T);
          std::fill(o.values.begin(), o.values.end(), *limit);
          out.push_back(std::move(o));
        }
        break;
      }
    }
  }
}

}  // namespace

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::H: return "H";
    case Metric::D: return "D";
    case Metric::F: return "F";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (Metric m : {Metric::H, Metric::D, Metric::F}) {
    if (metric_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::None: return "none";
    case SweepParam::CovScale: return "cov_scale";
    case SweepParam::ImageUpdates: return "image_updates";
    case SweepParam::InjectionFraction: return "epsilon";
    case SweepParam::InjectedCount: return "N0";
  }
  return "?";
}

std::optional<SweepParam> parse_sweep_param(std::string_view name) {
  for (SweepParam p : {SweepParam::None, SweepParam::CovScale, SweepParam::ImageUpdates,
                       SweepParam::InjectionFraction, SweepParam::InjectedCount}) {
    if (sweep_param_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view overlay_name(OverlayKind k) {
  switch (k) {
    case OverlayKind::DiversityFloor: return "diversity-floor";
    case OverlayKind::ImageRate: return "image-rate";
    case OverlayKind::TextInjectionFloor: return "text-injection-floor";
    case OverlayKind::ImageInjectionDiversityFloor: return "image-injection-diversity-floor";
    case OverlayKind::ImageInjectionFidelityLimit: return "image-injection-fidelity-limit";
  }
  return "?";
}

std::string_view appendix_variant_name(AppendixVariant v) {
  switch (v) {
    case AppendixVariant::FrozenImage: return "frozen_image";
    case AppendixVariant::FrozenText: return "frozen_text";
    case AppendixVariant::Both: return "both";
    case AppendixVariant::TextInjection: return "text_inj";
    case AppendixVariant::ImageInjection: return "image_inj";
  }
  return "?";
}

std::optional<AppendixVariant> parse_appendix_variant(std::string_view name) {
  for (AppendixVariant v : {AppendixVariant::FrozenImage, AppendixVariant::FrozenText,
                            AppendixVariant::Both, AppendixVariant::TextInjection,
                            AppendixVariant::ImageInjection}) {
    if (appendix_variant_name(v) == name) return v;
  }
  return std::nullopt;
}

TrainingConfig ExperimentPreset::training_config() const {
  TrainingConfig cfg = base;
  cfg.set_constant_schedule(text_updates_per_step, image_updates_per_step);
  return cfg;
}

void ExperimentPreset::validate() const {
  auto fail = [this](const std::string& msg) {
    throw Error(ErrorCode::RangeError, name + ": " + msg);
  };
  if (runs < 1) fail("runs must be at least 1");
  if (sweep.values.empty()) fail("sweep values must be non-empty");
  if (metrics.empty()) fail("at least one metric is required");
  for (double v : sweep.values) {
    switch (sweep.param) {
      case SweepParam::None:
        break;
      case SweepParam::CovScale:
        if (!std::isfinite(v) || v <= 0.0) fail("cov_scale sweep values must be positive");
        break;
      case SweepParam::ImageUpdates:
        if (!is_count(v, 1e6)) fail("image_updates sweep values must be integers in [0, 1e6]");
        break;
      case SweepParam::InjectionFraction:
        if (!std::isfinite(v) || v < 0.0 || v >= 1.0) fail("epsilon sweep values must be in [0, 1)");
        break;
      case SweepParam::InjectedCount:
        if (!is_count(v, 1e7)) fail("N0 sweep values must be integers in [0, 1e7]");
        break;
    }
  }
  if (fit.t_lo >= fit.t_hi) fail("fit window needs t_lo < t_hi");
  for (std::size_t t : snapshot_steps) {
    if (t > base.T) fail("snapshot step " + std::to_string(t) + " exceeds T");
  }
  try {
    for (double v : sweep.values) {
      const SweepPoint point = apply_sweep(*this, v);
      point.cfg.validate();
      if (point.text_injection) point.text_injection->validate();
      if (point.image_injection) point.image_injection->validate(point.cfg.d);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::RangeError) throw;
    fail(e.what());
  }
}

ExperimentPreset preset_fig3(bool paper_scale) {
  ExperimentPreset p = base_preset("fig3", 500, 1, 0);
  p.sweep = {SweepParam::CovScale, {0.01, 0.1, 0.5, 1.0, 10.0}};
  p.metrics = {Metric::H};
  p.overlays = {OverlayKind::DiversityFloor};
  p.plots = {{Metric::H, true, "Text diversity, frozen image model"}};
  scale_up(p, paper_scale, 1000);
  return p;
}

ExperimentPreset preset_fig4(bool paper_scale) {
  ExperimentPreset p = base_preset("fig4", 1000, 0, 1);
  p.base.init.probs = {0.06, 0.13, 0.2, 0.27, 0.34};
  p.metrics = {Metric::D, Metric::F};
  p.overlays = {OverlayKind::ImageRate};
  p.plots = {{Metric::D, true, "Image diversity per text, frozen text model"},
             {Metric::F, false, "Image fidelity per text, frozen text model"}};
  scale_up(p, paper_scale, 2000);
  return p;
}

ExperimentPreset preset_fig5(bool paper_scale) {
  ExperimentPreset p = base_preset("fig5", 500, 1, 0);
  p.sweep = {SweepParam::ImageUpdates, {0, 1, 2, 5, 10}};
  p.metrics = {Metric::H};
  p.overlays = {OverlayKind::DiversityFloor};
  p.plots = {{Metric::H, true, "Text diversity vs image updates per step"}};
  scale_up(p, paper_scale, 1000);
  return p;
}

ExperimentPreset preset_fig6(bool paper_scale) {
  ExperimentPreset p = base_preset("fig6", 2000, 1, 1);
  p.text_injection = TextInjectionConfig{0.05, 0.1, {}};
  p.sweep = {SweepParam::InjectionFraction, {0.0, 0.01, 0.02, 0.05, 0.1}};
  p.metrics = {Metric::H};
  p.overlays = {OverlayKind::TextInjectionFloor};
  p.plots = {{Metric::H, false, "Text diversity with corpus injection"}};
  scale_up(p, paper_scale, 10000);
  return p;
}

ExperimentPreset preset_fig7(bool paper_scale) {
  ExperimentPreset p = base_preset("fig7", 2000, 0, 1);
  p.base.init.K = 1;
  p.image_injection = ImageInjectionConfig{};
  p.sweep = {SweepParam::InjectedCount, {0, 1, 10, 100, 1000}};
  p.metrics = {Metric::D, Metric::F};
  p.overlays = {OverlayKind::ImageInjectionDiversityFloor,
                OverlayKind::ImageInjectionFidelityLimit};
  p.plots = {{Metric::D, true, "Image diversity with user-content injection"},
             {Metric::F, false, "Image fidelity with user-content injection"}};
  scale_up(p, paper_scale, 10000);
  return p;
}

ExperimentPreset preset_fig7_deterministic(bool paper_scale) {
  ExperimentPreset p = preset_fig7(paper_scale);
  p.name = "fig7-deterministic";
  p.base.deterministic_counts = true;
  return p;
}

ExperimentPreset preset_appendixC(AppendixVariant variant) {
  ExperimentPreset p = base_preset("appendixC-" + std::string(appendix_variant_name(variant)),
                                   1000, 1, 1);
  switch (variant) {
    case AppendixVariant::FrozenImage:
      p.image_updates_per_step = 0;
      break;
    case AppendixVariant::FrozenText:
      p.text_updates_per_step = 0;
      break;
    case AppendixVariant::Both:
      break;
    case AppendixVariant::TextInjection:
      p.text_injection = TextInjectionConfig{0.005, 0.1, {}};
      break;
    case AppendixVariant::ImageInjection:
      p.image_injection = ImageInjectionConfig{};
      break;
  }
  p.runs = 1;
  p.metrics = {Metric::H, Metric::D, Metric::F};
  p.plots = {{Metric::H, false, "Text diversity"},
             {Metric::D, true, "Image diversity per text"},
             {Metric::F, false, "Image fidelity per text"}};
  p.snapshot_steps = {0, 250, 500, 750, 1000};
  p.snapshot_samples = 200;
  return p;
}

ExperimentPreset preset_custom() {
  ExperimentPreset p = base_preset("custom", 500, 1, 1);
  p.metrics = {Metric::H, Metric::D, Metric::F};
  p.overlays = {OverlayKind::DiversityFloor};
  p.plots = {{Metric::H, true, "Text diversity"},
             {Metric::D, true, "Image diversity per text"},
             {Metric::F, false, "Image fidelity per text"}};
  return p;
}

std::vector<std::string> preset_names() {
  return {"fig3", "fig4", "fig5", "fig6", "fig7", "fig7-deterministic", "appendixC", "custom"};
}

std::optional<ExperimentPreset> preset_by_name(std::string_view name, bool paper_scale,
                                               AppendixVariant variant) {
  if (name == "fig3") return preset_fig3(paper_scale);
  if (name == "fig4") return preset_fig4(paper_scale);
  if (name == "fig5") return preset_fig5(paper_scale);
  if (name == "fig6") return preset_fig6(paper_scale);
  if (name == "fig7") return preset_fig7(paper_scale);
  if (name == "fig7-deterministic") return preset_fig7_deterministic(paper_scale);
  if (name == "appendixC") return preset_appendixC(variant);
  if (name == "custom") return preset_custom();
  return std::nullopt;
}

SweepPoint apply_sweep(const ExperimentPreset& preset, double value) {
  SweepPoint point{preset.training_config(), preset.text_injection, preset.image_injection};
  switch (preset.sweep.param) {
    case SweepParam::None:
      break;
    case SweepParam::CovScale:
      point.cfg.init.cov_scale = value;
      break;
    case SweepParam::ImageUpdates:
      point.cfg.set_constant_schedule(preset.text_updates_per_step,
                                      static_cast<std::size_t>(value));
      break;
    case SweepParam::InjectionFraction:
      if (value == 0.0) {
        point.text_injection.reset();
      } else {
        if (!point.text_injection) point.text_injection = TextInjectionConfig{};
        point.text_injection->epsilon = value;
      }
      break;
    case SweepParam::InjectedCount:
      if (!point.image_injection) point.image_injection = ImageInjectionConfig{};
      point.image_injection->N0 = static_cast<std::size_t>(value);
      break;
  }
  return point;
}

ExperimentResult run_experiment(const ExperimentPreset& preset, std::uint64_t base_seed,
                                std::size_t workers) {
  if (workers < 1) throw Error(ErrorCode::RangeError, "workers must be at least 1");
  preset.validate();

  const std::size_t n_values = preset.sweep.values.size();
  const std::size_t n_tasks = n_values * preset.runs;
  const std::size_t T = preset.base.T;
  std::vector<RunSummary> summaries(n_tasks);

  auto run_task = [&](std::size_t task) {
    const std::size_t sweep_index = task / preset.runs;
    const std::size_t run_index = task % preset.runs;
    const SweepPoint point = apply_sweep(preset, preset.sweep.values[sweep_index]);

    std::vector<Snapshot> snapshots;
    StateObserver observer;
    std::optional<RngStream> snap_rng;
    if (task == 0 && !preset.snapshot_steps.empty()) {
      snap_rng.emplace(derive_stream(base_seed, run_index, Phase::Snapshot));
      observer = [&](const SystemState& state) {
        const auto& steps = preset.snapshot_steps;
        if (std::find(steps.begin(), steps.end(), state.t) != steps.end()) {
          snapshots.push_back(take_snapshot(state, preset.snapshot_samples, *snap_rng));
        }
      };
    }
    const Trajectory traj = run_trajectory(point.cfg, point.text_injection,
                                           point.image_injection, base_seed, run_index, observer);
    summaries[task] = summarize(preset, traj, T);
    summaries[task].snapshots = std::move(snapshots);
  };

  const std::size_t n_threads = std::min(workers, std::max<std::size_t>(n_tasks, 1));
  if (n_threads <= 1) {
    for (std::size_t task = 0; task < n_tasks; ++task) run_task(task);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t task = next++; task < n_tasks; task = next++) {
          try {
            run_task(task);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n_tasks;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentResult result;
  result.metadata.total_runs = n_tasks;
  for (std::size_t s = 0; s < n_values; ++s) {
    const double value = preset.sweep.values[s];
    const std::size_t first = s * preset.runs;
    for (std::size_t r = 0; r < preset.runs; ++r) {
      const RunSummary& sum = summaries[first + r];
      result.metadata.mass_drift_warnings += sum.mass_drift_warnings;
      result.metadata.injections += sum.injections;
      if (sum.aborted) result.metadata.aborted.push_back({value, r, sum.reason});
    }
    for (Metric m : preset.metrics) {
      if (m == Metric::H) {
        std::vector<const std::vector<double>*> cols;
        for (std::size_t r = 0; r < preset.runs; ++r) {
          if (!summaries[first + r].aborted) cols.push_back(&summaries[first + r].H);
        }
        AggregateSeries series;
        series.metric = Metric::H;
        series.param = preset.sweep.param;
        series.sweep_value = value;
        fold(cols, T, series);
        result.series.push_back(std::move(series));
      } else {
        aggregate_per_text(summaries, first, preset.runs, m, preset, value, T, result.series);
      }
    }
    add_overlays(preset, s, value, base_seed, result.overlays);
  }
  if (n_tasks > 0) result.snapshots = std::move(summaries[0].snapshots);
  return result;
}

const AggregateSeries* find_series(const ExperimentResult& result, Metric metric,
                                   double sweep_value, std::optional<TextId> text_id) {
  for (const AggregateSeries& s : result.series) {
    if (s.metric == metric && s.sweep_value == sweep_value && s.text_id == text_id) return &s;
  }
  return nullptr;
}

RateFit fit_log_rate(const AggregateSeries& series, FitWindow window) {
  double sx = 0.0, sy = 0.0;
  std::vector<std::pair<double, double>> pts;
  const std::size_t hi = std::min(window.t_hi, series.mean.size() == 0 ? 0 : series.mean.size() - 1);
  for (std::size_t t = window.t_lo; t <= hi && t < series.mean.size(); ++t) {
    if (series.runs[t] == 0 || !(series.mean[t] > 0.0)) continue;
    const double x = static_cast<double>(t);
    const double y = std::log(series.mean[t]);
    pts.emplace_back(x, y);
    sx += x;
    sy += y;
  }
  if (pts.size() < 2) throw Error(ErrorCode::EmptySeries, "fewer than two points to fit");
  const double n = static_cast<double>(pts.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.rate = std::exp(fit.slope);
  fit.points = pts.size();
  return fit;
}

}  // namespace coevolve
