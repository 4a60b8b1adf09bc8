#include <doctest.h>

#include <cmath>

#include "coevolve/error.hpp"
#include "coevolve/experiments.hpp"
#include "coevolve/report.hpp"
#include "coevolve/theory.hpp"

using namespace coevolve;

namespace {

ExperimentPreset shortened(ExperimentPreset p, std::size_t T, std::size_t runs) {
  p.base.T = T;
  p.runs = runs;
  p.snapshot_steps.clear();
  return p;
}

const OverlaySeries* find_overlay(const ExperimentResult& r, OverlayKind kind, double value,
                                  std::optional<TextId> id = {}) {
  for (const auto& o : r.overlays) {
    if (o.kind == kind && o.sweep_value == value && o.text_id == id) return &o;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("fig3 preset") {
  const ExperimentPreset p = preset_fig3();
  CHECK(p.base.N == 1000);
  CHECK(p.base.init.K == 5);
  CHECK(p.base.T == 500);
  CHECK(p.runs == 20);
  CHECK(p.text_updates_per_step == 1);
  CHECK(p.image_updates_per_step == 0);
  CHECK(p.sweep.param == SweepParam::CovScale);
  CHECK(p.sweep.values == std::vector<double>{0.01, 0.1, 0.5, 1.0, 10.0});
  const ExperimentPreset paper = preset_fig3(true);
  CHECK(paper.runs == 100);
  CHECK(paper.base.T == 1000);

  const ExperimentResult r = run_experiment(shortened(p, 3, 1), 1, 1);
  const OverlaySeries* floor = find_overlay(r, OverlayKind::DiversityFloor, 0.01);
  REQUIRE(floor != nullptr);
  CHECK(floor->values[0] == doctest::Approx(0.8));
  CHECK(floor->values[3] == doctest::Approx(0.8 * std::pow(0.999, 3)));
}

TEST_CASE("fig4 preset") {
  const ExperimentPreset p = preset_fig4();
  CHECK(p.base.init.probs == std::vector<double>{0.06, 0.13, 0.2, 0.27, 0.34});
  CHECK(p.text_updates_per_step == 0);
  CHECK(p.image_updates_per_step == 1);
  CHECK(p.base.T == 1000);
  CHECK(preset_fig4(true).base.T == 2000);

  const ExperimentResult r = run_experiment(shortened(p, 2, 1), 1, 1);
  const OverlaySeries* rate = find_overlay(r, OverlayKind::ImageRate, 0.0, TextId{4});
  REQUIRE(rate != nullptr);
  CHECK(rate->values[1] / rate->values[0] == doctest::Approx(0.998898).epsilon(1e-6));
  for (TextId id = 0; id < 5; ++id) {
    const AggregateSeries* d = find_series(r, Metric::D, 0.0, id);
    REQUIRE(d != nullptr);
    CHECK(d->mean[0] == doctest::Approx(2.0));
  }
}

TEST_CASE("fig5 preset") {
  const ExperimentPreset p = preset_fig5();
  CHECK(p.sweep.param == SweepParam::ImageUpdates);
  CHECK(p.sweep.values == std::vector<double>{0, 1, 2, 5, 10});
  CHECK(preset_fig5(true).base.T == 1000);
  // N_t = 0 is the fig3 sigma^2 = 1 configuration.
  const SweepPoint a = apply_sweep(p, 0.0);
  const SweepPoint b = apply_sweep(preset_fig3(), 1.0);
  CHECK(a.cfg.text_updates == b.cfg.text_updates);
  CHECK(a.cfg.image_updates == b.cfg.image_updates);
  CHECK(a.cfg.init.cov_scale == b.cfg.init.cov_scale);
  CHECK(apply_sweep(p, 10.0).cfg.image_updates.front() == 10);
}

TEST_CASE("fig6 preset") {
  const ExperimentPreset p = preset_fig6();
  REQUIRE(p.text_injection.has_value());
  CHECK(p.text_injection->alpha == 0.05);
  CHECK(p.sweep.values == std::vector<double>{0.0, 0.01, 0.02, 0.05, 0.1});
  CHECK(preset_fig6(true).base.T == 10000);
  CHECK_FALSE(apply_sweep(p, 0.0).text_injection.has_value());
  CHECK(apply_sweep(p, 0.02).text_injection->epsilon == 0.02);

  const ExperimentResult r = run_experiment(shortened(p, 2, 1), 1, 1);
  const OverlaySeries* floor = find_overlay(r, OverlayKind::TextInjectionFloor, 0.1);
  REQUIRE(floor != nullptr);
  CHECK(floor->values[0] == doctest::Approx(0.17647).epsilon(1e-4));
  CHECK(find_overlay(r, OverlayKind::TextInjectionFloor, 0.0) == nullptr);
}

TEST_CASE("fig7 preset") {
  const ExperimentPreset p = preset_fig7();
  CHECK(p.base.init.K == 1);
  CHECK(p.sweep.values == std::vector<double>{0, 1, 10, 100, 1000});
  CHECK_FALSE(p.base.deterministic_counts);
  CHECK(preset_fig7_deterministic().base.deterministic_counts);
  CHECK(preset_fig7(true).base.T == 10000);

  ExperimentPreset small = shortened(p, 2, 1);
  small.alpha_samples = 2000;
  const ExperimentResult r = run_experiment(small, 1, 1);
  const OverlaySeries* limit = find_overlay(r, OverlayKind::ImageInjectionFidelityLimit, 100.0, TextId{0});
  REQUIRE(limit != nullptr);
  CHECK(limit->values[0] == doctest::Approx(0.10258).epsilon(1e-4));
  CHECK(find_overlay(r, OverlayKind::ImageInjectionDiversityFloor, 0.0, TextId{0}) == nullptr);
  CHECK(find_overlay(r, OverlayKind::ImageInjectionDiversityFloor, 1.0, TextId{0}) == nullptr);
  const OverlaySeries* floor = find_overlay(r, OverlayKind::ImageInjectionDiversityFloor, 100.0, TextId{0});
  REQUIRE(floor != nullptr);
  // alpha(d=2, dof=99) is close to sqrt(99) - 3/(8 sqrt(99)).
  CHECK(floor->values[0] == doctest::Approx(std::sqrt(99.0) * 2.0 / std::sqrt(99.0 * 1099.0)).epsilon(0.01));
}

TEST_CASE("appendixC presets") {
  const ExperimentPreset both = preset_appendixC(AppendixVariant::Both);
  CHECK(both.runs == 1);
  CHECK(both.base.T == 1000);
  CHECK(both.snapshot_steps == std::vector<std::size_t>{0, 250, 500, 750, 1000});
  CHECK(both.text_updates_per_step == 1);
  CHECK(both.image_updates_per_step == 1);
  CHECK(preset_appendixC(AppendixVariant::ImageInjection).image_injection->N0 == 100);
  CHECK(preset_appendixC(AppendixVariant::FrozenImage).image_updates_per_step == 0);
  CHECK(preset_appendixC(AppendixVariant::FrozenText).text_updates_per_step == 0);
  CHECK(preset_appendixC(AppendixVariant::TextInjection).text_injection.has_value());

  ExperimentPreset p = both;
  p.base.T = 40;
  p.snapshot_steps = {0, 20, 40};
  p.snapshot_samples = 30;
  const ExperimentResult r = run_experiment(p, 3, 1);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[0].t == 0);
  CHECK(r.snapshots[2].t == 40);
  CHECK(r.snapshots[0].probs == std::vector<double>(5, 0.2));
  CHECK(r.snapshots[0].per_text[0].mean == std::vector<double>{1.0, 0.0});
  CHECK(r.snapshots[1].per_text[3].samples.size() == 30);
}

TEST_CASE("preset lookup and validation") {
  for (const std::string& name : preset_names()) CHECK(preset_by_name(name).has_value());
  CHECK_FALSE(preset_by_name("fig9").has_value());
  ExperimentPreset p = preset_fig3();
  p.runs = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = preset_fig3();
  p.sweep.values.clear();
  CHECK_THROWS_AS(p.validate(), Error);
  p = preset_fig5();
  p.sweep.values = {1.5};
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("single-run aggregation") {
  ExperimentPreset p = shortened(preset_custom(), 10, 1);
  const ExperimentResult r = run_experiment(p, 21, 1);
  const Trajectory t = run_trajectory(p.training_config(), std::nullopt, std::nullopt, 21, 0);
  const AggregateSeries* h = find_series(r, Metric::H, 0.0);
  REQUIRE(h != nullptr);
  for (std::size_t i = 0; i <= 10; ++i) {
    CHECK(h->mean[i] == t.records[i].H);
    CHECK(h->standard_error[i] == 0.0);
    CHECK(h->runs[i] == 1);
  }
}

TEST_CASE("aggregation statistics") {
  ExperimentPreset p = shortened(preset_custom(), 5, 4);
  const ExperimentResult r = run_experiment(p, 22, 1);
  std::vector<Trajectory> runs;
  for (std::size_t k = 0; k < 4; ++k) {
    runs.push_back(run_trajectory(p.training_config(), std::nullopt, std::nullopt, 22, k));
  }
  const AggregateSeries* h = find_series(r, Metric::H, 0.0);
  REQUIRE(h != nullptr);
  for (std::size_t t = 0; t <= 5; ++t) {
    double m = 0.0;
    for (const auto& tr : runs) m += tr.records[t].H / 4.0;
    double v = 0.0;
    for (const auto& tr : runs) v += (tr.records[t].H - m) * (tr.records[t].H - m) / 3.0;
    CHECK(h->mean[t] == doctest::Approx(m).epsilon(1e-14));
    CHECK(h->standard_error[t] == doctest::Approx(std::sqrt(v / 4.0)).epsilon(1e-10));
  }
}

TEST_CASE("results do not depend on the worker count") {
  ExperimentPreset p = shortened(preset_fig3(), 20, 4);
  const ExperimentResult one = run_experiment(p, 7, 1);
  const ExperimentResult many = run_experiment(p, 7, 8);
  CHECK(render_series_csv(one.series) == render_series_csv(many.series));
  CHECK(render_overlays_csv(one.overlays) == render_overlays_csv(many.overlays));
  CHECK_THROWS_AS(run_experiment(p, 7, 0), Error);
}

TEST_CASE("fit_log_rate recovers an exact exponential") {
  AggregateSeries s;
  for (std::size_t t = 0; t <= 600; ++t) {
    s.mean.push_back(2.0 * std::pow(0.997, static_cast<double>(t)));
    s.standard_error.push_back(0.0);
    s.runs.push_back(1);
  }
  const RateFit fit = fit_log_rate(s, {10, 500});
  CHECK(fit.rate == doctest::Approx(0.997).epsilon(1e-12));
  CHECK(fit.points == 491);
  s.runs.assign(s.runs.size(), 0);
  CHECK_THROWS_AS(fit_log_rate(s, {10, 500}), Error);
}
