#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"

using namespace polglrt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Fixture {
  Scene scene;
  std::vector<Channel> channels;
  Hypothesis truth;
  SignalSet clean;
  NoiseCov cov;

  explicit Fixture(std::size_t receivers, Triple dipole = {0.3, 0.5, 0.8}, bool polarimetric = true,
                   Pair x2 = {30.0, -20.0}) {
    SceneConfig c = testing::small_scene(receivers, 32, dipole);
    if (!polarimetric)
      for (auto& r : c.receivers) r.dipole_v.reset();
    c.targets[0].x2_m = x2;
    c.targets[0].v2_mps = {8.0, -3.0};
    scene = build_scene(c);
    channels = scene.channels();
    truth = {scene.targets[0].x2, scene.targets[0].v2};
    clean = synthesize(scene, true);
    // H-only receivers can see no target-path signal at all; fall back to unit variance.
    const double s2 = clean.tp.squaredNorm() > 0.0 ? snr_to_variance(clean.tp, clean.grid, 0.0) : 1.0;
    const double s2dp = snr_to_variance(*clean.dp, clean.grid, 0.0);
    cov = NoiseCov::common(channels.size(), s2, s2dp);
  }
};

}  // namespace

TEST_CASE("steering phases") {
  Fixture f(6);
  const auto st = steering(f.truth, f.scene, f.channels);
  CHECK((st.tp.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK((st.dp.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);

  // At the true hypothesis the steered noise-free data is a constant times p~ per channel.
  const Eigen::MatrixXcd y = steered_stack(f.clean, st, DpMode::no_dp);
  for (Eigen::Index c = 0; c < y.rows(); ++c) {
    const Eigen::VectorXcd ratio = y.row(c).transpose().cwiseQuotient(f.scene.waveform.p_tilde);
    CHECK((ratio.array() - ratio(0)).abs().maxCoeff() <= 1e-9 * std::abs(ratio(0)));
  }

  // Static hypothesis at the circle centre: every receiver sees the same path length.
  const auto s0 = steering(Hypothesis{}, f.scene, f.channels);
  for (Eigen::Index c = 1; c < s0.tp.rows(); ++c) CHECK((s0.tp.row(c) - s0.tp.row(0)).norm() < 1e-7);
}

TEST_CASE("correlation matrices") {
  Fixture f(2);
  const auto st = steering(f.truth, f.scene, f.channels);
  SignalSet zero = f.clean;
  zero.tp.setZero();
  zero.dp->setZero();
  const auto cz = correlations(zero, st, DpMode::with_dp);
  CHECK(cz.q1.norm() == 0.0);

  SignalSet tp_only = f.clean;
  tp_only.dp->setZero();
  const auto c1 = correlations(tp_only, st, DpMode::with_dp);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c1.q1);
  const auto& ev = es.eigenvalues();
  const double top = ev(ev.size() - 1);
  for (Eigen::Index i = 0; i + 1 < ev.size(); ++i) CHECK(std::abs(ev(i)) < 1e-9 * top);

  std::mt19937_64 gen(1);
  const SignalSet r = testing::random_data(f.scene, gen);
  const double expected = r.grid.delta_omega * (r.tp.squaredNorm() + r.dp->squaredNorm());
  for (const Hypothesis& h : {f.truth, Hypothesis{Vec2(-90, 40), Vec2(0, 12)}}) {
    const auto c = correlations(r, steering(h, f.scene, f.channels), DpMode::with_dp);
    CHECK_THAT(c.q1.trace().real(), WithinRel(expected, 1e-12));
  }
}

TEST_CASE("glrt statistic examples") {
  Fixture f(6);
  const auto st = steering(f.truth, f.scene, f.channels);

  const auto out = glrt(f.clean, f.cov, st, DpMode::no_dp);
  const Eigen::MatrixXcd y = steered_stack(f.clean, st, DpMode::no_dp);
  double expected = 0.0;
  for (Eigen::Index c = 0; c < y.rows(); ++c) expected += y.row(c).squaredNorm() / f.cov.sigma2_tp(c);
  expected *= f.clean.grid.delta_omega;
  CHECK_THAT(out.lambda, WithinRel(expected, 1e-10));

  SignalSet dp_only = f.clean;
  dp_only.tp.setZero();
  std::mt19937_64 gen(3);
  dp_only.dp = testing::random_complex(dp_only.tp.rows(), dp_only.tp.cols(), gen);
  const auto o = glrt(dp_only, f.cov, st, DpMode::with_dp);
  CHECK(std::abs(o.lambda) <= 1e-9 * o.lambda_full);

  for (int i = 0; i < 50; ++i) {
    const SignalSet d = testing::random_data(f.scene, gen, i % 2 ? 1.0 : 0.1);
    const auto cov = testing::random_cov(f.channels.size(), gen);
    const auto g = glrt(d, cov, st, DpMode::with_dp, false);
    CHECK(g.lambda >= -1e-9 * g.lambda_full);
  }
}

TEST_CASE("glrt invariances") {
  Fixture f(2);
  const auto st = steering(f.truth, f.scene, f.channels);
  std::mt19937_64 gen(9);
  const SignalSet d = testing::random_data(f.scene, gen);
  const auto cov = testing::random_cov(f.channels.size(), gen);
  const cplx c(1.7, -2.2);
  SignalSet dc = d;
  dc.tp *= c;
  *dc.dp *= c;
  NoiseCov covc = cov;
  covc.sigma2_tp *= std::norm(c);
  *covc.sigma2_dp *= std::norm(c);
  for (auto mode : {DpMode::with_dp, DpMode::no_dp}) {
    CHECK_THAT(glrt(dc, covc, st, mode).lambda, WithinRel(glrt(d, cov, st, mode).lambda, 1e-10));
  }

  // Scaling the waveform scales the noise-free statistic by |c|^2.
  Scene scaled = f.scene;
  scaled.waveform.p_tilde *= c;
  const SignalSet clean_c = synthesize(scaled, true);
  CHECK_THAT(glrt(clean_c, f.cov, st, DpMode::no_dp).lambda,
             WithinRel(std::norm(c) * glrt(f.clean, f.cov, st, DpMode::no_dp).lambda, 1e-10));
}

TEST_CASE("no-DP statistic equals the target-path block of the full computation") {
  std::mt19937_64 gen(12);
  for (std::size_t m : {1u, 2u, 6u}) {
    Fixture f(m);
    const auto st = steering(f.truth, f.scene, f.channels);
    for (int i = 0; i < 10; ++i) {
      const SignalSet d = testing::random_data(f.scene, gen);
      const auto cov = testing::random_cov(f.channels.size(), gen);
      const auto full = correlations(d, st, DpMode::with_dp);
      Eigen::MatrixXcd blockdiag = whiten(full.q1, stacked_variances(cov, f.channels.size(), DpMode::with_dp));
      const auto mm = static_cast<Eigen::Index>(f.channels.size());
      blockdiag.topRightCorner(mm, mm).setZero();
      blockdiag.bottomLeftCorner(mm, mm).setZero();
      const double tp_block = max_eigenvalue(blockdiag.topLeftCorner(mm, mm));
      CHECK_THAT(glrt(d, cov, st, DpMode::no_dp).lambda, WithinRel(tp_block, 1e-12));
    }
  }
}

TEST_CASE("waveform MLE") {
  Fixture f(2);
  const auto st = steering(f.truth, f.scene, f.channels);
  std::mt19937_64 gen(14);
  const auto m = static_cast<Eigen::Index>(f.channels.size());
  const Eigen::VectorXcd s = testing::random_complex(2 * m, 1, gen).col(0);
  const Eigen::VectorXcd p = f.scene.waveform.p_tilde;
  const SignalSet d = testing::model_data(p, s, st, f.channels, f.clean.grid, DpMode::with_dp);
  const Eigen::VectorXcd ph = mle_waveform(s, d, st, f.cov, DpMode::with_dp);
  for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(std::abs(ph(i) - p(i)) <= 1e-10 * std::abs(p(i)));

  const cplx c(0.3, 1.1);
  const Eigen::VectorXcd pc = mle_waveform(c * s, d, st, f.cov, DpMode::with_dp);
  CHECK((pc - ph / c).norm() <= 1e-12 * ph.norm());

  // Completing the square: residual = |d|^2 - J at any signature.
  for (int i = 0; i < 20; ++i) {
    const SignalSet r = testing::random_data(f.scene, gen);
    const auto cov = testing::random_cov(f.channels.size(), gen);
    for (auto mode : {DpMode::with_dp, DpMode::no_dp}) {
      const Eigen::Index dim = (mode == DpMode::with_dp ? 2 : 1) * m;
      const Eigen::VectorXcd sig = testing::random_complex(dim, 1, gen).col(0);
      const Eigen::VectorXcd pr = mle_waveform(sig, r, st, cov, mode);
      const double lhs = testing::residual_norm2(r, pr, sig, st, cov, mode);
      const double rhs = testing::data_norm2(r, cov, mode) - objective_j(sig, r, st, cov, mode).j;
      CHECK_THAT(lhs, WithinRel(rhs, 1e-9));
    }
  }
}

TEST_CASE("reduced objective: invariance, optimum, gradient") {
  std::mt19937_64 gen(15);
  for (std::size_t rx : {1u, 2u}) {
    Fixture f(rx);
    const auto st = steering(f.truth, f.scene, f.channels);
    const SignalSet d = testing::random_data(f.scene, gen);
    const auto cov = testing::random_cov(f.channels.size(), gen);
    const auto mode = DpMode::with_dp;
    const auto out = glrt(d, cov, st, mode);
    const Eigen::VectorXd s2 = stacked_variances(cov, f.channels.size(), mode);

    const Eigen::VectorXcd s = testing::random_complex(out.w.size(), 1, gen).col(0);
    CHECK_THAT(objective_j(cplx(-2.0, 0.5) * s, d, st, cov, mode).j, WithinRel(objective_j(s, d, st, cov, mode).j, 1e-12));

    const Eigen::VectorXcd s_star = s2.cwiseSqrt().cast<cplx>().asDiagonal() * out.w;
    const auto at_star = objective_j(s_star, d, st, cov, mode);
    CHECK_THAT(at_star.j, WithinRel(out.lambda_full, 1e-10));
    CHECK(at_star.grad.norm() < 1e-8 * out.lambda_full);

    const double best = testing::random_search_max_j(d, st, cov, mode, 10000, gen);
    CHECK(best <= out.lambda_full + 1e-9 * out.lambda_full);
    CHECK(best >= 0.98 * out.lambda_full);

    for (int i = 0; i < 10; ++i) {
      const Eigen::VectorXcd p = testing::random_complex(out.w.size(), 1, gen).col(0);
      const auto an = objective_j(p, d, st, cov, mode).grad;
      const auto fd = testing::finite_difference_grad(p, d, st, cov, mode);
      CHECK((an - fd).norm() <= 1e-5 * an.norm());
    }
  }
}

TEST_CASE("dipole estimation") {
  CHECK(dipole_angle_error(Vec3(0, 0, 1), Vec3(0, 0, 1)) == 0.0);
  CHECK(dipole_angle_error(Vec3(0, 0, -1), Vec3(0, 0, 1)) == 0.0);
  CHECK_THAT(dipole_angle_error(Vec3(1, 0, 0), Vec3(0, 0, 1)), WithinAbs(std::numbers::pi / 2, 1e-15));

  Fixture f(6);
  const auto out = detect(f.clean, f.cov, f.scene, f.truth, DpMode::no_dp);
  CHECK(dipole_angle_error(*out.e_est, f.scene.targets[0].e_sc) < 1e-6);
  const auto est = estimate_dipole(cplx(0.2, -3.0) * out.w, f.scene, f.channels, f.truth, f.cov);
  CHECK((est.e - *out.e_est).norm() < 1e-12);
  CHECK_FALSE(est.rank_deficient);

  // Horizontal dipoles seen from a target at the circle centre span only the ground plane.
  Fixture h(6, {0.0, 0.0, 1.0}, false, {0.0, 0.0});
  std::mt19937_64 gen(2);
  SignalSet noisy = h.clean;
  noisy.tp += testing::random_complex(noisy.tp.rows(), noisy.tp.cols(), gen) * std::sqrt(h.cov.sigma2_tp(0) / noisy.grid.delta_omega);
  const auto oh = detect(noisy, h.cov, h.scene, h.truth, DpMode::no_dp);
  CHECK(std::abs(dipole_angle_error(*oh.e_est, Vec3(0, 0, 1)) - std::numbers::pi / 2) < 0.2);
  CHECK(estimate_dipole(oh.w, h.scene, h.channels, h.truth, h.cov).rank_deficient);
}
