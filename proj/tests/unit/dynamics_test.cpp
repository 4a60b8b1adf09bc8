#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "coevolve/dynamics.hpp"
#include "coevolve/error.hpp"
#include "coevolve/experiments.hpp"
#include "coevolve/theory.hpp"
#include "stats.hpp"

using namespace coevolve;

namespace {

SystemState two_texts(double var, double sep) {
  SystemState s;
  s.text = TextModel::uniform(2);
  s.images = {ImageComponent({0.0, 0.0}, SymMatrix::scaled_identity(2, var)),
              ImageComponent({sep, 0.0}, SymMatrix::scaled_identity(2, var))};
  return s;
}

double probs_sum(const TextModel& t) { return std::accumulate(t.probs.begin(), t.probs.end(), 0.0); }

}  // namespace

TEST_CASE("initial state layout") {
  TrainingConfig cfg = TrainingConfig::constant(100, 10, 1, 1);
  const SystemState s = make_initial_state(cfg);
  REQUIRE(s.images.size() == 5);
  CHECK(s.images[0].mean() == std::vector<double>{1.0, 0.0});
  CHECK(s.images[1].mean()[0] == doctest::Approx(std::cos(2.0 * std::numbers::pi / 5)));
  CHECK(s.images[1].mean()[1] == doctest::Approx(std::sin(2.0 * std::numbers::pi / 5)));
  CHECK(text_diversity(s.text) == doctest::Approx(0.8));
  CHECK(min_pairwise_mean_distance(s.text, s.images) ==
        doctest::Approx(2.0 * std::sin(std::numbers::pi / 5)).epsilon(1e-12));
}

TEST_CASE("config validation") {
  TrainingConfig cfg = TrainingConfig::constant(1, 5, 1, 1);
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainingConfig::constant(1, 5, 1, 0);
  CHECK_NOTHROW(cfg.validate());
  cfg.text_updates.pop_back();
  CHECK_THROWS_AS(cfg.validate(), Error);
  TextInjectionConfig inj;
  inj.epsilon = 0.0;
  CHECK_THROWS_AS(inj.validate(), Error);
  inj.epsilon = 1.0;
  CHECK_THROWS_AS(inj.validate(), Error);
}

TEST_CASE("text update keeps a one-hot prior") {
  SystemState s = two_texts(1.0, 1.0);
  s.text = TextModel::from_probs({0.0, 1.0});
  RngStream rng = derive_stream(1, 0, Phase::TextUpdate);
  const TextModel next = text_update_once(s, 500, rng);
  CHECK(next.probs == std::vector<double>{0.0, 1.0});
}

TEST_CASE("text update with identical components preserves p") {
  SystemState s;
  s.text = TextModel::from_probs({0.2, 0.3, 0.5});
  for (int i = 0; i < 3; ++i) s.images.emplace_back(std::vector<double>{0.3, 0.3}, SymMatrix::identity(2));
  RngStream rng = derive_stream(2, 0, Phase::TextUpdate);
  std::vector<double> sum(3, 0.0), sq(3, 0.0);
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    const TextModel next = text_update_once(s, 100, rng);
    for (std::size_t k = 0; k < 3; ++k) {
      sum[k] += next.probs[k];
      sq[k] += next.probs[k] * next.probs[k];
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const double mean = sum[k] / reps;
    const double se = std::sqrt(std::max(sq[k] / reps - mean * mean, 0.0) / reps);
    CHECK(std::fabs(mean - s.text.probs[k]) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("text update lowers diversity in expectation") {
  const SystemState s = two_texts(0.01, 10.0);
  RngStream rng = derive_stream(3, 0, Phase::TextUpdate);
  const int reps = 1000;
  double sum = 0.0, sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    SystemState copy = s;
    const double h = text_diversity(text_update_once(copy, 1000, rng));
    sum += h;
    sq += h * h;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / reps);
  CHECK(mean < 0.5 - 3.0 * se);
  CHECK(mean == doctest::Approx(0.5 * (1.0 - 1.0 / 1000)).epsilon(1e-4));
}

TEST_CASE("image update degenerate and large-N cases") {
  SystemState s;
  s.text = TextModel::uniform(1);
  s.images = {ImageComponent({0.25, -0.5}, SymMatrix(2))};
  RngStream rng = derive_stream(4, 0, Phase::ImageUpdate);
  const auto frozen = image_update_once(s, 50, rng);
  CHECK(frozen[0].mean() == std::vector<double>{0.25, -0.5});
  CHECK(frozen[0].cov() == SymMatrix(2));

  s.images = {ImageComponent({0.0, 0.0}, SymMatrix::identity(2))};
  const auto big = image_update_once(s, 1000000, rng);
  CHECK(std::fabs(big[0].cov()(0, 0) - 1.0) < 0.01);
  CHECK(std::fabs(big[0].cov()(0, 1)) < 0.01);
  CHECK(std::fabs(big[0].cov()(1, 1) - 1.0) < 0.01);
  CHECK(big[0].cov().is_symmetric());
}

TEST_CASE("image update skips components with at most one draw") {
  SystemState s = two_texts(1.0, 3.0);
  s.text = TextModel::from_probs({0.0, 1.0});
  RngStream rng = derive_stream(5, 0, Phase::ImageUpdate);
  const auto next = image_update_once(s, 20, rng);
  CHECK(next[0].mean() == s.images[0].mean());
  CHECK(next[0].cov() == s.images[0].cov());
  CHECK(next[1].mean() != s.images[1].mean());
}

TEST_CASE("image update follows the scaled Wishart law") {
  // Given N_i = n, the next covariance is S^{1/2} (W / (n - 1)) S^{1/2}.
  const SymMatrix sigma{{2.0, 0.5}, {0.5, 1.0}};
  SystemState s;
  s.text = TextModel::uniform(1);
  s.images = {ImageComponent({0.0, 0.0}, sigma)};
  const std::size_t n = 20, reps = 10000;
  RngStream model = derive_stream(6, 0, Phase::ImageUpdate);
  RngStream oracle = derive_stream(6, 1, Phase::WishartAlpha);
  std::vector<double> sim(reps), ref(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    sim[r] = image_update_once(s, n, model)[0].cov().trace();
    const SymMatrix w = sample_wishart(SymMatrix::identity(2), n - 1, oracle);
    // trace(R W R) = trace(W R^2) = trace(W Sigma).
    double t = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) t += w(i, j) * sigma(j, i);
    ref[r] = t / static_cast<double>(n - 1);
  }
  CHECK(testsupport::ks_statistic(sim, ref) < testsupport::ks_critical(reps, reps, 1e-3));
}

TEST_CASE("pooled covariance decomposition") {
  PointSet model(2, 3), user(2, 2);
  const double mp[3][2] = {{0.0, 1.0}, {2.0, -1.0}, {1.0, 3.0}};
  const double up[2][2] = {{5.0, 5.0}, {4.0, 7.0}};
  for (int i = 0; i < 3; ++i) std::copy(mp[i], mp[i] + 2, model.row(i).begin());
  for (int i = 0; i < 2; ++i) std::copy(up[i], up[i] + 2, user.row(i).begin());

  auto stats = [](const PointSet& p, std::vector<double>& m, SymMatrix& c) {
    const std::size_t n = p.size();
    m.assign(2, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k) m[k] += p.row(i)[k] / n;
    c = SymMatrix(2);
    for (std::size_t i = 0; i < n; ++i)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) c(a, b) += (p.row(i)[a] - m[a]) * (p.row(i)[b] - m[b]) / (n - 1.0);
  };
  std::vector<double> mt, mu;
  SymMatrix st, su;
  stats(model, mt, st);
  stats(user, mu, su);
  const double ni = 3, n0 = 2;
  SymMatrix expected = (ni - 1) * st + (n0 - 1) * su;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) expected(a, b) += ni * n0 / (ni + n0) * (mt[a] - mu[a]) * (mt[b] - mu[b]);
  expected *= 1.0 / (ni + n0 - 1);

  const PooledStats pooled = pooled_mean_cov(model, user);
  CHECK(pooled.mean[0] == doctest::Approx((0 + 2 + 1 + 5 + 4) / 5.0));
  CHECK(pooled.mean[1] == doctest::Approx((1 - 1 + 3 + 5 + 7) / 5.0));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(pooled.cov(a, b) == doctest::Approx(expected(a, b)).epsilon(1e-13));
}

TEST_CASE("image injection with N0 = 0 reduces to the plain update") {
  TrainingConfig cfg = TrainingConfig::constant(300, 1, 0, 1);
  const SystemState s = make_initial_state(cfg);
  RngStream a = derive_stream(7, 0, Phase::ImageUpdate);
  RngStream b = derive_stream(7, 0, Phase::ImageUpdate);
  RngStream user = derive_stream(7, 0, Phase::UserDraws);
  ImageInjectionConfig inj;
  inj.N0 = 0;
  const auto plain = image_update_once(s, 300, a);
  const auto injected = image_update_with_injection(s, 300, inj, b, user);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(plain[i].mean() == injected[i].mean());
    CHECK(plain[i].cov() == injected[i].cov());
  }
  CHECK(user.draws() == 0);
}

TEST_CASE("image injection on an unsampled text uses only user draws") {
  SystemState s;
  s.text = TextModel::from_probs({0.0, 1.0});
  const SymMatrix user_cov{{1.5, 0.2}, {0.2, 0.7}};
  s.images = {ImageComponent({1.0, 2.0}, SymMatrix(2)),
              ImageComponent({-1.0, 0.0}, SymMatrix::identity(2))};
  ImageInjectionConfig inj;
  inj.N0 = 50;
  inj.user_means = {{1.0, 2.0}, {-1.0, 0.0}};
  inj.user_covs = {user_cov, SymMatrix::identity(2)};
  RngStream model = derive_stream(8, 0, Phase::ImageUpdate);
  RngStream user = derive_stream(8, 0, Phase::UserDraws);
  const auto next = image_update_with_injection(s, 100, inj, model, user);

  RngStream replay = derive_stream(8, 0, Phase::UserDraws);
  const PointSet draws = sample_gaussian(inj.user_means[0], user_cov, 50, replay);
  const PooledStats direct = pooled_mean_cov(PointSet(2, 0), draws);
  CHECK(next[0].mean() == direct.mean);
  CHECK(next[0].cov() == direct.cov);
}

TEST_CASE("deterministic counts draw exactly N p_i model images") {
  RngStream rng = derive_stream(1, 0, Phase::ImageUpdate);
  const std::vector<std::size_t> counts =
      draw_text_counts(TextModel::from_probs({0.25, 0.75}), 1000, rng, true);
  CHECK(counts == std::vector<std::size_t>{250, 750});
}

TEST_CASE("macro step compositions") {
  TrainingConfig cfg = TrainingConfig::constant(200, 3, 0, 0);
  const SystemState init = make_initial_state(cfg);
  RunStreams streams = RunStreams::for_run(1, 0, false, false);
  const SystemState same = macro_step(init, cfg, 0, streams);
  CHECK(same.t == 1);
  CHECK(same.text.probs == init.text.probs);
  CHECK(same.images[2].cov() == init.images[2].cov());
  CHECK(streams.text.draws() == 0);
  CHECK(streams.image.draws() == 0);

  cfg.set_constant_schedule(1, 0);
  const SystemState frozen_image = macro_step(init, cfg, 0, streams);
  CHECK(frozen_image.images[2].cov() == init.images[2].cov());
  CHECK(frozen_image.text.probs != init.text.probs);

  cfg.set_constant_schedule(0, 1);
  const SystemState frozen_text = macro_step(init, cfg, 0, streams);
  CHECK(frozen_text.text.probs == init.text.probs);
  CHECK(frozen_text.images[2].cov() != init.images[2].cov());
}

TEST_CASE("forced text injection") {
  SystemState s = two_texts(1.0, 2.0);
  TextInjectionConfig inj;
  inj.epsilon = 0.1;
  RngStream rng = derive_stream(9, 0, Phase::Injection);
  inject_text(s, inj, rng);
  REQUIRE(s.text.size() == 3);
  CHECK(s.text.probs[0] == doctest::Approx(0.45));
  CHECK(s.text.probs[2] == doctest::Approx(0.1));
  CHECK(s.text.ids[2] == 2);
  CHECK(text_diversity(s.text) == doctest::Approx(0.585));
  CHECK(s.images[2].ref_mean() == s.images[2].mean());
  CHECK(std::hypot(s.images[2].mean()[0], s.images[2].mean()[1]) == doctest::Approx(1.0));
  CHECK(probs_sum(s.text) == doctest::Approx(1.0).epsilon(1e-12));

  SystemState one = two_texts(1.0, 2.0);
  one.text = TextModel::from_probs({1.0, 0.0});
  inject_text(one, inj, rng);
  CHECK(text_diversity(one.text) == doctest::Approx(0.18));
}

TEST_CASE("run_trajectory contracts") {
  TrainingConfig cfg = TrainingConfig::constant(100, 0, 1, 1);
  const Trajectory empty = run_trajectory(cfg, std::nullopt, std::nullopt, 1, 0);
  REQUIRE(empty.records.size() == 1);
  CHECK(empty.records[0].H == doctest::Approx(0.8));

  cfg = TrainingConfig::constant(100, 30, 1, 1);
  const Trajectory a = run_trajectory(cfg, std::nullopt, std::nullopt, 5, 2);
  const Trajectory b = run_trajectory(cfg, std::nullopt, std::nullopt, 5, 2);
  REQUIRE(a.records.size() == 31);
  for (std::size_t t = 0; t <= 30; ++t) {
    CHECK(a.records[t].H == b.records[t].H);
    for (std::size_t i = 0; i < 5; ++i) CHECK(a.records[t].per_text[i].D == b.records[t].per_text[i].D);
  }

  // alpha = 0 leaves every other stream untouched.
  TextInjectionConfig never;
  never.alpha = 0.0;
  const Trajectory c = run_trajectory(cfg, never, std::nullopt, 5, 2);
  for (std::size_t t = 0; t <= 30; ++t) CHECK(c.records[t].H == a.records[t].H);
  CHECK(c.injections == 0);
}

TEST_CASE("text injection grows the corpus by the number of events") {
  TrainingConfig cfg = TrainingConfig::constant(200, 200, 1, 1);
  TextInjectionConfig inj;
  inj.alpha = 0.2;
  inj.epsilon = 0.05;
  std::size_t last_size = 5;
  std::size_t events = 0;
  const Trajectory t = run_trajectory(cfg, inj, std::nullopt, 3, 0, [&](const SystemState& s) {
    CHECK(std::fabs(probs_sum(s.text) - 1.0) <= 1e-9);
    CHECK(s.text.size() >= last_size);
    events += s.text.size() - last_size;
    last_size = s.text.size();
  });
  CHECK(t.injections == events);
  CHECK(events > 10);
  CHECK(t.records.back().per_text.size() == 5 + events);
}

TEST_CASE("collapse is absorbing") {
  TrainingConfig cfg = TrainingConfig::constant(20, 400, 1, 0);
  cfg.init.cov_scale = 0.01;
  const Trajectory t = run_trajectory(cfg, std::nullopt, std::nullopt, 11, 0);
  std::size_t first_zero = t.records.size();
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    if (t.records[i].H == 0.0) {
      first_zero = i;
      break;
    }
  }
  REQUIRE(first_zero < t.records.size());
  for (std::size_t i = first_zero; i < t.records.size(); ++i) CHECK(t.records[i].H == 0.0);
}

TEST_CASE("single-text image diversity decays at the predicted rate") {
  ExperimentPreset p = preset_custom();
  p.base.N = 1000;
  p.base.T = 200;
  p.base.init.K = 1;
  p.text_updates_per_step = 0;
  p.image_updates_per_step = 1;
  p.runs = 100;
  p.metrics = {Metric::D};
  p.overlays.clear();
  const ExperimentResult r = run_experiment(p, 17, 1);
  const AggregateSeries* d = find_series(r, Metric::D, 0.0, TextId{0});
  REQUIRE(d != nullptr);
  const RateFit fit = fit_log_rate(*d, {0, 200});
  CHECK(fit.rate == doctest::Approx(image_rate_approx(2, 1000, 1.0).rate).epsilon(3e-4));
}
