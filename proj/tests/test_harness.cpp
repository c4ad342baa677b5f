#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace polglrt;

namespace {

ExperimentConfig small_experiment(std::size_t receivers = 2) {
  SceneConfig c = testing::small_scene(receivers, 32, {0.819152, 0.0, 0.573576});
  c.targets[0].x2_m = {0.0, 0.0};
  c.noise.dp_snr_db = 10.0;
  c.experiment.cfar = 0.01;
  c.experiment.trials_h0 = 1000;
  c.experiment.trials_h1 = 300;
  c.experiment.holdout_trials = 1000;
  c.experiment.dipole_trials = 100;
  c.experiment.snr_grid_db = {-12, -8, -4, 0};
  c.experiment.threads = 2;
  return build_experiment(c);
}

bool same(const SweepResult& a, const SweepResult& b) {
  if (a.pd.size() != b.pd.size() || a.thresholds.size() != b.thresholds.size()) return false;
  for (std::size_t i = 0; i < a.pd.size(); ++i)
    if (a.pd[i].estimate.detections != b.pd[i].estimate.detections) return false;
  for (std::size_t i = 0; i < a.thresholds.size(); ++i)
    if (a.thresholds[i].threshold != b.thresholds[i].threshold) return false;
  return true;
}

}  // namespace

TEST_CASE("sweeps are reproducible and schedule independent") {
  ExperimentConfig e = small_experiment();
  const auto a = sweep_snr(e);
  CHECK(same(a, sweep_snr(e)));
  e.threads = 1;
  CHECK(same(a, sweep_snr(e)));
  e.threads = 3;
  CHECK(same(a, sweep_snr(e)));
  CHECK(a.thresholds.size() == e.snr_grid_db.size() * e.modes.size());
  for (const auto& r : a.pd) {
    CHECK(r.estimate.pd >= 0.0);
    CHECK(r.estimate.pd <= 1.0);
    CHECK(r.estimate.ci.lo <= r.estimate.pd);
    CHECK(r.estimate.ci.hi >= r.estimate.pd);
  }

  // Requesting a mode twice gives two identical curves.
  e.modes = {DetectMode::pol, DetectMode::pol};
  const auto twice = sweep_snr(e);
  const auto n = e.snr_grid_db.size();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(twice.pd[i].estimate.detections == twice.pd[n + i].estimate.detections);
    CHECK(twice.thresholds[i].threshold == twice.thresholds[n + i].threshold);
  }
}

TEST_CASE("NOPOL in the harness equals POL on the scene without V antennas") {
  const ExperimentConfig e = small_experiment(2);
  TrialEngine engine(e);
  const NoiseCov full_cov = engine.covariance_for_snr(-6.0);
  const auto lam = engine.statistics_at(stream::h1, true, 5, {full_cov},
                                     {DetectMode::nopol, DetectMode::dp_nopol});

  const Scene h = e.scene.horizontal_only();
  const auto ch = h.channels();
  const NoiseCov cov = NoiseCov::common(ch.size(), full_cov.sigma2_tp(0), (*full_cov.sigma2_dp)(0));
  SignalSet clean = synthesize(h, true);
  for (std::size_t t = 0; t < 5; ++t) {
    const NoiseKey key{e.seed, stream::h1, t};
    SignalSet d = clean;
    d.tp += sample_noise(ch, d.grid, cov.sigma2_tp, key, Path::target);
    *d.dp += sample_noise(ch, d.grid, *cov.sigma2_dp, key, Path::direct);
    CHECK(testing::rel_err(glrt(d, cov, h, e.hypothesis, DpMode::no_dp, false).lambda, lam[t * 2 + 0]) < 1e-12);
    // A difference of two eigenvalues: compare on the scale of the larger one.
    const auto g = glrt(d, cov, h, e.hypothesis, DpMode::with_dp, false);
    CHECK(std::abs(g.lambda - lam[t * 2 + 1]) < 1e-12 * g.lambda_full);
  }
}

TEST_CASE("threshold calibration") {
  ExperimentConfig e = small_experiment();
  e.cfar = 1.0;
  TrialEngine engine(e);
  const auto lam = engine.statistics(stream::h0, false, e.trials_h0, {-4.0}, {DetectMode::pol});
  CHECK(calibrate_threshold(e, DetectMode::pol, -4.0) == *std::min_element(lam.begin(), lam.end()));

  e.cfar = 0.001;
  CHECK_THROWS_AS(calibrate_threshold(e, DetectMode::pol, -4.0), ConfigError);

  // Doubling the H0 batch moves the threshold by less than 3 bootstrap standard errors.
  e.cfar = 0.01;
  const double t1 = calibrate_threshold(e, DetectMode::pol, -4.0);
  const auto base = engine.statistics(stream::h0, false, e.trials_h0, {-4.0}, {DetectMode::pol});
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::size_t> pick(0, base.size() - 1);
  std::vector<double> boot;
  for (int b = 0; b < 200; ++b) {
    std::vector<double> r(base.size());
    for (auto& x : r) x = base[pick(gen)];
    boot.push_back(cfar_quantile(r, e.cfar));
  }
  const double se = standard_error(boot) * std::sqrt(static_cast<double>(boot.size()));
  e.trials_h0 *= 2;
  const double t2 = calibrate_threshold(e, DetectMode::pol, -4.0);
  CHECK(std::abs(t2 - t1) < 3.0 * se);

  const auto fa = holdout_false_alarm(e, DetectMode::pol, -4.0, t2);
  CHECK(std::abs(fa.rate - e.cfar) <= 3.0 * std::sqrt(e.cfar * (1 - e.cfar) / static_cast<double>(e.holdout_trials)));
}

TEST_CASE("detection probability limits") {
  ExperimentConfig e = small_experiment();
  e.cfar = 0.05;
  const double thr_hi = calibrate_threshold(e, DetectMode::pol, 60.0);
  CHECK(estimate_pd(e, DetectMode::pol, 60.0, thr_hi).pd == 1.0);

  e.trials_h1 = 2000;
  const double thr_lo = calibrate_threshold(e, DetectMode::pol, -60.0);
  const auto low = estimate_pd(e, DetectMode::pol, -60.0, thr_lo);
  CHECK(std::abs(low.pd - e.cfar) < 4.0 * std::sqrt(e.cfar * (1 - e.cfar) / 2000.0));
}

TEST_CASE("pd curves follow their isotonic fit") {
  ExperimentConfig e = small_experiment();
  e.snr_grid_db = {-16, -14, -12, -10, -8, -6, -4, -2};
  const auto res = sweep_snr(e);
  for (auto m : e.modes) {
    const auto curve = res.curve(m);
    std::vector<double> y, w;
    for (const auto& r : curve) {
      y.push_back(r.estimate.pd);
      w.push_back(static_cast<double>(r.estimate.trials));
    }
    const auto fit = isotonic_fit(y, w);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double half = 0.5 * (curve[i].estimate.ci.hi - curve[i].estimate.ci.lo);
      CHECK(std::abs(fit[i] - y[i]) < 3.0 * half + 1e-12);
    }
  }
}

TEST_CASE("noise-free image peaks at the target cell") {
  SceneConfig c = testing::small_scene(6, 64);
  c.targets[0].x2_m = {40.0, -80.0};
  c.noise.enabled = false;
  c.noise.dp_snr_db = 10.0;
  c.experiment.image_grid = {21, 21, {-200, 200}, {-200, 200}};
  c.experiment.image_mode = "DP-POL";
  const auto img = statistic_image(build_experiment(c));
  CHECK(img.lambda.rows() == 21);
  CHECK(img.lambda.cols() == 21);
  const auto [ix, iy] = img.argmax();
  CHECK(ix == img.grid.nearest_x(40.0));
  CHECK(iy == img.grid.nearest_y(-80.0));
  REQUIRE(img.targets.size() == 1);
  CHECK(img.targets[0].dphi < 1e-6);
}

TEST_CASE("noise-only image stays below the CFAR threshold") {
  SceneConfig c = testing::small_scene(2, 32);
  c.targets.clear();
  const std::size_t m = c.channel_count();
  c.noise.sigma2_tp = std::vector<double>(m, 1.0);
  c.noise.sigma2_dp = std::vector<double>(m, 1.0);
  c.experiment.hypothesis = HypothesisConfig{};
  c.experiment.image_grid = {21, 21, {-200, 200}, {-200, 200}};
  c.experiment.image_mode = "POL";
  c.experiment.cfar = 0.01;
  c.experiment.trials_h0 = 2000;
  const ExperimentConfig e = build_experiment(c);
  TrialEngine engine(e);
  const auto lam = engine.statistics_at(stream::h0, false, e.trials_h0, {engine.single_covariance()},
                                     {DetectMode::pol});
  const double thr = cfar_quantile(lam, e.cfar);
  const auto img = statistic_image(e);
  const double cells = static_cast<double>(img.lambda.size());
  const double above = static_cast<double>((img.lambda.array() > thr).count());
  CHECK(above / cells <= e.cfar + 3.0 * std::sqrt(e.cfar * (1 - e.cfar) / cells));
}

TEST_CASE("dipole error curves") {
  ExperimentConfig e = small_experiment(6);
  e.scene.targets[0].e_sc = Vec3(0, 0, 1);
  e.snr_grid_db = {-10, 10, 40};
  e.modes = {DetectMode::pol, DetectMode::nopol, DetectMode::dp_pol};
  const auto rows = mc_dipole(e);
  REQUIRE(rows.size() == 9);
  for (const auto& r : rows) {
    CHECK(r.mean_dphi >= 0.0);
    CHECK(r.mean_dphi <= std::numbers::pi / 2 + 1e-12);
    if (r.mode == DetectMode::nopol) CHECK(std::abs(r.mean_dphi - std::numbers::pi / 2) < 0.2);
  }
  CHECK(rows[2].mean_dphi < 0.01);   // POL at 40 dB
  CHECK(rows[0].mean_dphi > rows[2].mean_dphi);
}

TEST_CASE("batched statistics match per-realization evaluation") {
  ExperimentConfig e = small_experiment(2);
  TrialEngine engine(e);
  const NoiseCov a = engine.covariance_for_snr(-6.0);
  NoiseCov b = engine.covariance_for_snr(3.0);
  *b.sigma2_dp *= 4.0;
  const std::vector<NoiseCov> covs{a, b, a};
  for (bool present : {false, true}) {
    const auto lam = engine.statistics_at(stream::h0, present, 4, covs, all_modes());
    for (std::size_t t = 0; t < 4; ++t) {
      const auto z = engine.standard_noise(NoiseKey{e.seed, stream::h0, t});
      for (std::size_t s = 0; s < covs.size(); ++s) {
        const SignalSet full = engine.realization(z, present, covs[s]);
        for (std::size_t m = 0; m < 4; ++m) {
          const auto v = engine.view(all_modes()[m]);
          const SignalSet sub = select_channels(full, v.rows);
          const auto g = glrt(sub, covs[s].select(v.rows), v.steer, dp_mode_of(v.mode), false);
          CHECK(std::abs(g.lambda - lam[(t * 3 + s) * 4 + m]) < 1e-12 * g.lambda_full);
        }
      }
    }
  }
}
