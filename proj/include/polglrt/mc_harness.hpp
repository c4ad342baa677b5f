#pragma once

/**
 * @file mc_harness.hpp
 * @brief Monte-Carlo experiments: CFAR calibration, detection probability,
 *        SNR sweeps, test-statistic images and dipole-error curves.
 *
 * Every realization is keyed by (seed, stream, trial) and every channel by its
 * physical identity, so results do not depend on thread count or scheduling,
 * and a mode that drops channels sees exactly the noise those channels carry
 * in the full scene. Noise samples are shared across SNR points (common random
 * numbers); only their scale changes.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polglrt/detector.hpp"
#include "polglrt/errors.hpp"
#include "polglrt/forward_model.hpp"
#include "polglrt/noise_model.hpp"
#include "polglrt/parallel.hpp"
#include "polglrt/scene.hpp"
#include "polglrt/stats.hpp"

namespace polglrt {

/// Detector configurations compared in the experiments.
enum class DetectMode { dp_pol, dp_nopol, pol, nopol };

inline const char* to_string(DetectMode m) {
  switch (m) {
    case DetectMode::dp_pol: return "DP-POL";
    case DetectMode::dp_nopol: return "DP-NOPOL";
    case DetectMode::pol: return "POL";
    case DetectMode::nopol: return "NOPOL";
  }
  return "?";
}

inline DetectMode detect_mode_from_string(const std::string& s) {
  if (s == "DP-POL") return DetectMode::dp_pol;
  if (s == "DP-NOPOL") return DetectMode::dp_nopol;
  if (s == "POL") return DetectMode::pol;
  if (s == "NOPOL") return DetectMode::nopol;
  throw ConfigError("unknown mode '" + s + "' (expected DP-POL, DP-NOPOL, POL or NOPOL)");
}

inline DpMode dp_mode_of(DetectMode m) {
  return (m == DetectMode::dp_pol || m == DetectMode::dp_nopol) ? DpMode::with_dp : DpMode::no_dp;
}

inline bool is_polarimetric(DetectMode m) { return m == DetectMode::dp_pol || m == DetectMode::pol; }

inline const std::vector<DetectMode>& all_modes() {
  static const std::vector<DetectMode> modes{DetectMode::dp_pol, DetectMode::dp_nopol, DetectMode::pol,
                                             DetectMode::nopol};
  return modes;
}

/// How measurement noise is specified. Explicit variances win over SNRs.
struct NoiseSpec {
  bool enabled = true;
  SnrConvention convention = SnrConvention::per_sample;
  std::optional<double> tp_snr_db;
  std::optional<double> dp_snr_db;
  std::optional<Eigen::VectorXd> sigma2_tp;  // one per scene channel
  std::optional<Eigen::VectorXd> sigma2_dp;
};

/// Hypothesis grid over the scene; nodes at linspace(min, max, n).
struct ImageGrid {
  std::size_t nx = 41;
  std::size_t ny = 41;
  double x_min = -200.0, x_max = 200.0;
  double y_min = -200.0, y_max = 200.0;

  double x(std::size_t i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(nx - 1); }
  double y(std::size_t j) const { return ny == 1 ? y_min : y_min + (y_max - y_min) * static_cast<double>(j) / static_cast<double>(ny - 1); }

  std::size_t nearest_x(double v) const { return nearest(v, x_min, x_max, nx); }
  std::size_t nearest_y(double v) const { return nearest(v, y_min, y_max, ny); }

 private:
  static std::size_t nearest(double v, double lo, double hi, std::size_t n) {
    if (n <= 1) return 0;
    const double t = (v - lo) / (hi - lo) * static_cast<double>(n - 1);
    return static_cast<std::size_t>(std::clamp(std::lround(t), 0L, static_cast<long>(n - 1)));
  }
};

struct ExperimentConfig {
  Scene scene;
  NoiseSpec noise;
  Hypothesis hypothesis;
  double cfar = 0.001;
  std::size_t trials_h0 = 10000;
  std::size_t trials_h1 = 2000;
  std::size_t holdout_trials = 10000;
  std::size_t dipole_trials = 1000;
  std::vector<double> snr_grid_db;
  std::vector<DetectMode> modes = all_modes();
  DetectMode image_mode = DetectMode::dp_pol;
  ImageGrid image;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  bool needs_dp() const {
    return std::any_of(modes.begin(), modes.end(), [](DetectMode m) { return dp_mode_of(m) == DpMode::with_dp; });
  }

  void validate_cfar() const {
    if (!(cfar > 0.0 && cfar <= 1.0)) throw ConfigError("cfar must lie in (0, 1]");
    if (cfar * static_cast<double>(trials_h0) < 10.0 - 1e-9) {
      throw ConfigError("cfar * trials_h0 must be at least 10 to estimate the threshold quantile");
    }
  }
};

/// Random streams of the experiments.
namespace stream {
inline constexpr std::uint64_t h0 = 1;
inline constexpr std::uint64_t h1 = 2;
inline constexpr std::uint64_t holdout = 3;
inline constexpr std::uint64_t image = 4;
inline constexpr std::uint64_t dipole = 5;
inline constexpr std::uint64_t single = 6;
}  // namespace stream

/// Channel subset and DP handling for one detector configuration.
struct ModeView {
  DetectMode mode = DetectMode::dp_pol;
  std::vector<Eigen::Index> rows;  // into the full scene channel list
  std::vector<Channel> channels;
  SteeringSet steer;               // rows already selected
};

inline std::vector<Eigen::Index> mode_rows(const std::vector<Channel>& channels, DetectMode mode) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (is_polarimetric(mode) || channels[i].pol == Polarization::H) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

inline SteeringSet select_rows(const SteeringSet& s, const std::vector<Eigen::Index>& rows) {
  SteeringSet out;
  out.tp.resize(static_cast<Eigen::Index>(rows.size()), s.tp.cols());
  out.dp.resize(static_cast<Eigen::Index>(rows.size()), s.dp.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.tp.row(static_cast<Eigen::Index>(i)) = s.tp.row(rows[i]);
    out.dp.row(static_cast<Eigen::Index>(i)) = s.dp.row(rows[i]);
  }
  return out;
}

/**
 * Shared machinery for all experiments on one configuration: the noise-free
 * spectra of the full scene, the steering at the fixed hypothesis, and the
 * generation of keyed noisy realizations.
 */
class TrialEngine {
 public:
  explicit TrialEngine(const ExperimentConfig& cfg)
      : cfg_(cfg), channels_(cfg.scene.channels()), clean_(synthesize(cfg.scene, true)) {
    if (channels_.empty()) throw ConfigError("scene has no receive channels");
    steer_ = steering(cfg.hypothesis, cfg.scene, channels_);
  }

  const ExperimentConfig& config() const { return cfg_; }
  const std::vector<Channel>& channels() const { return channels_; }
  const SignalSet& clean() const { return clean_; }

  ModeView view(DetectMode mode) const { return view(mode, steer_); }

  ModeView view(DetectMode mode, const SteeringSet& full_steer) const {
    ModeView v;
    v.mode = mode;
    v.rows = mode_rows(channels_, mode);
    if (v.rows.empty()) throw ConfigError(std::string("mode ") + to_string(mode) + " has no channels");
    for (auto r : v.rows) v.channels.push_back(channels_[static_cast<std::size_t>(r)]);
    v.steer = select_rows(full_steer, v.rows);
    return v;
  }

  /// Common variances giving the requested average TP SNR (and the configured DP SNR).
  NoiseCov covariance_for_snr(double tp_snr_db) const {
    const double s2_tp = snr_to_variance(clean_.tp, clean_.grid, tp_snr_db, cfg_.noise.convention);
    std::optional<double> s2_dp;
    if (cfg_.noise.dp_snr_db) {
      s2_dp = snr_to_variance(*clean_.dp, clean_.grid, *cfg_.noise.dp_snr_db, cfg_.noise.convention);
    }
    return NoiseCov::common(channels_.size(), s2_tp, s2_dp);
  }

  /// Variances for single-realization runs (detect, image, simulate).
  NoiseCov single_covariance() const {
    const auto& ns = cfg_.noise;
    NoiseCov cov;
    if (ns.sigma2_tp) {
      cov.sigma2_tp = *ns.sigma2_tp;
    } else if (ns.tp_snr_db) {
      cov.sigma2_tp = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(channels_.size()),
                                                snr_to_variance(clean_.tp, clean_.grid, *ns.tp_snr_db, ns.convention));
    } else {
      throw ConfigError("noise needs tp_snr_db or sigma2_tp");
    }
    if (ns.sigma2_dp) {
      cov.sigma2_dp = *ns.sigma2_dp;
    } else if (ns.dp_snr_db) {
      cov.sigma2_dp = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(channels_.size()),
                                                snr_to_variance(*clean_.dp, clean_.grid, *ns.dp_snr_db, ns.convention));
    }
    if (static_cast<std::size_t>(cov.sigma2_tp.size()) != channels_.size()) {
      throw ConfigError("sigma2_tp must list one variance per channel");
    }
    cov.validate();
    return cov;
  }

  /// Unit-variance noise of one realization for every channel of the scene.
  struct StandardNoise {
    Eigen::MatrixXcd tp;
    Eigen::MatrixXcd dp;
  };

  StandardNoise standard_noise(const NoiseKey& key) const {
    const auto m = static_cast<Eigen::Index>(channels_.size());
    const auto n = static_cast<Eigen::Index>(clean_.grid.size());
    StandardNoise z{Eigen::MatrixXcd(m, n), Eigen::MatrixXcd(m, n)};
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto ck = channels_[static_cast<std::size_t>(c)].key();
      standard_noise_row(z.tp.row(c), channel_seed(key, Path::target, ck));
      standard_noise_row(z.dp.row(c), channel_seed(key, Path::direct, ck));
    }
    return z;
  }

  /// Full-scene data: optional target echo plus scaled noise; DP always carries the direct signal.
  SignalSet realization(const StandardNoise& z, bool target_present, const NoiseCov& cov, bool add_noise = true) const {
    SignalSet d;
    d.channels = channels_;
    d.grid = clean_.grid;
    const auto m = static_cast<Eigen::Index>(channels_.size());
    d.tp = target_present ? clean_.tp : Eigen::MatrixXcd::Zero(m, clean_.tp.cols());
    d.dp = *clean_.dp;
    if (!add_noise) return d;
    for (Eigen::Index c = 0; c < m; ++c) {
      d.tp.row(c) += z.tp.row(c) * std::sqrt(cov.sigma2_tp(c) / d.grid.delta_omega);
      if (cov.sigma2_dp) d.dp->row(c) += z.dp.row(c) * std::sqrt((*cov.sigma2_dp)(c) / d.grid.delta_omega);
    }
    return d;
  }

  /**
   * Statistics for trials [0, n) of a stream, every SNR point and mode.
   * Result index: (trial * snrs + s) * modes + m.
   */
  std::vector<double> statistics(std::uint64_t stream_id, bool target_present, std::size_t n,
                                 const std::vector<double>& snr_db, const std::vector<DetectMode>& modes) const {
    for (auto m : modes) {
      if (dp_mode_of(m) == DpMode::with_dp && !cfg_.noise.dp_snr_db) {
        throw ConfigError("direct-path modes need noise.dp_snr_db");
      }
    }
    std::vector<NoiseCov> covs;
    for (double s : snr_db) covs.push_back(covariance_for_snr(s));
    return statistics_at(stream_id, target_present, n, covs, modes);
  }

  /**
   * Same, at explicitly given variances instead of SNR points.
   *
   * With D the whitening scales, U the steered noise-free stack and V the
   * steered unit noise, the whitened correlation is
   * D U U^H D + D U V^H + V U^H D + V V^H. U U^H is shared by all trials and
   * the other products by all variance settings of a trial. Settings whose
   * scales agree on every row where U is nonzero give identical matrices and
   * share one evaluation.
   */
  std::vector<double> statistics_at(std::uint64_t stream_id, bool target_present, std::size_t n,
                                    const std::vector<NoiseCov>& covs, const std::vector<DetectMode>& modes) const {
    const auto m = static_cast<Eigen::Index>(channels_.size());
    bool with_dp = false;
    for (auto md : modes) with_dp = with_dp || dp_mode_of(md) == DpMode::with_dp;
    for (const auto& c : covs) {
      c.validate();
      if (c.sigma2_tp.size() != m) throw ConfigError("variance list does not match the scene channels");
      if (with_dp && !c.sigma2_dp) throw ModeError("with_dp mode requires direct-path variances");
    }
    std::vector<ModeView> views;
    std::vector<std::vector<Eigen::Index>> idx;
    for (auto md : modes) {
      views.push_back(view(md));
      std::vector<Eigen::Index> r = views.back().rows;
      if (dp_mode_of(md) == DpMode::with_dp)
        for (auto x : views.back().rows) r.push_back(m + x);
      idx.push_back(std::move(r));
    }
    const DpMode stack_mode = with_dp ? DpMode::with_dp : DpMode::no_dp;
    const Eigen::Index dim = with_dp ? 2 * m : m;
    const std::size_t ns = covs.size(), nm = modes.size();

    SignalSet clean = clean_;
    if (!target_present) clean.tp.setZero();
    const Eigen::MatrixXcd u = std::sqrt(clean_.grid.delta_omega) * steered_stack(clean, steer_, stack_mode);
    const Eigen::MatrixXcd p = u * u.adjoint();
    std::vector<Eigen::VectorXd> scale;
    for (const auto& c : covs) {
      Eigen::VectorXd a(dim);
      a.head(m) = c.sigma2_tp.cwiseSqrt().cwiseInverse();
      if (with_dp) a.tail(m) = c.sigma2_dp->cwiseSqrt().cwiseInverse();
      scale.push_back(a);
    }
    std::vector<std::size_t> same_as(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      same_as[s] = s;
      for (std::size_t q = 0; q < s && same_as[s] == s; ++q) {
        bool eq = true;
        for (Eigen::Index r = 0; r < dim && eq; ++r)
          if (u.row(r).squaredNorm() > 0.0 && scale[q](r) != scale[s](r)) eq = false;
        if (eq) same_as[s] = q;
      }
    }

    std::vector<double> out(n * ns * nm);
    parallel_for(n, resolve_threads(cfg_.threads), [&](std::size_t t) {
      const auto z = standard_noise(NoiseKey{cfg_.seed, stream_id, t});
      SignalSet noise;
      noise.channels = channels_;
      noise.grid = clean_.grid;
      noise.tp = z.tp;
      if (with_dp) noise.dp = z.dp;
      const Eigen::MatrixXcd v = steered_stack(noise, steer_, stack_mode);
      const Eigen::MatrixXcd x = u * v.adjoint();
      const Eigen::MatrixXcd vv = v * v.adjoint();
      for (std::size_t s = 0; s < ns; ++s) {
        if (same_as[s] != s) {
          for (std::size_t k = 0; k < nm; ++k) out[(t * ns + s) * nm + k] = out[(t * ns + same_as[s]) * nm + k];
          continue;
        }
        const Eigen::VectorXcd dv = scale[s].cast<cplx>();
        const Eigen::MatrixXcd dx = dv.asDiagonal() * x;
        const Eigen::MatrixXcd g = dv.asDiagonal() * p * dv.asDiagonal() + dx + dx.adjoint() + vv;
        for (std::size_t k = 0; k < nm; ++k) {
          const auto& r = idx[k];
          const auto sz = static_cast<Eigen::Index>(r.size());
          Eigen::MatrixXcd sub(sz, sz);
          for (Eigen::Index i = 0; i < sz; ++i)
            for (Eigen::Index j = 0; j < sz; ++j) sub(i, j) = g(r[static_cast<std::size_t>(i)], r[static_cast<std::size_t>(j)]);
          double lam = max_eigenvalue(sub);
          if (dp_mode_of(modes[k]) == DpMode::with_dp) {
            const Eigen::Index h = sz / 2;
            lam -= max_eigenvalue(sub.bottomRightCorner(h, h));
          }
          out[(t * ns + s) * nm + k] = lam;
        }
      }
    });
    return out;
  }

 private:
  ExperimentConfig cfg_;
  std::vector<Channel> channels_;
  SignalSet clean_;
  SteeringSet steer_;
};

inline std::vector<double> column(const std::vector<double>& flat, std::size_t n, std::size_t ns, std::size_t nm,
                                  std::size_t s, std::size_t m) {
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = flat[(t * ns + s) * nm + m];
  return out;
}

/// CFAR threshold for one mode at one TP SNR from trials_h0 null realizations.
inline double calibrate_threshold(const ExperimentConfig& cfg, DetectMode mode, double tp_snr_db) {
  cfg.validate_cfar();
  TrialEngine engine(cfg);
  const auto lam = engine.statistics(stream::h0, false, cfg.trials_h0, {tp_snr_db}, {mode});
  return cfar_quantile(lam, cfg.cfar);
}

struct PdEstimate {
  double pd = 0.0;
  Interval ci;
  std::size_t detections = 0;
  std::size_t trials = 0;
};

inline PdEstimate pd_from_counts(std::size_t k, std::size_t n) {
  PdEstimate e;
  e.detections = k;
  e.trials = n;
  e.pd = n ? static_cast<double>(k) / static_cast<double>(n) : 0.0;
  e.ci = wilson_interval(k, n);
  return e;
}

/// Fraction of trials_h1 target-present realizations whose statistic exceeds @p threshold.
inline PdEstimate estimate_pd(const ExperimentConfig& cfg, DetectMode mode, double tp_snr_db, double threshold) {
  TrialEngine engine(cfg);
  const auto lam = engine.statistics(stream::h1, true, cfg.trials_h1, {tp_snr_db}, {mode});
  const auto k = static_cast<std::size_t>(std::count_if(lam.begin(), lam.end(), [&](double l) { return l > threshold; }));
  return pd_from_counts(k, lam.size());
}

struct FalseAlarmCheck {
  double rate = 0.0;
  double standard_error = 0.0;  // sqrt(cfar (1 - cfar) / n)
  bool within_3se = false;
};

inline FalseAlarmCheck false_alarm_check(const std::vector<double>& lam, double threshold, double cfar) {
  FalseAlarmCheck f;
  const auto k = std::count_if(lam.begin(), lam.end(), [&](double l) { return l > threshold; });
  const double n = static_cast<double>(lam.size());
  f.rate = static_cast<double>(k) / n;
  f.standard_error = std::sqrt(cfar * (1.0 - cfar) / n);
  f.within_3se = std::abs(f.rate - cfar) <= 3.0 * f.standard_error;
  return f;
}

/// False-alarm rate of @p threshold on a fresh batch of holdout_trials null realizations.
inline FalseAlarmCheck holdout_false_alarm(const ExperimentConfig& cfg, DetectMode mode, double tp_snr_db,
                                           double threshold) {
  TrialEngine engine(cfg);
  const auto lam = engine.statistics(stream::holdout, false, cfg.holdout_trials, {tp_snr_db}, {mode});
  return false_alarm_check(lam, threshold, cfg.cfar);
}

struct PdRow {
  DetectMode mode;
  double snr_db;
  PdEstimate estimate;
};

struct ThresholdRow {
  DetectMode mode;
  double snr_db;
  double threshold;
};

struct HoldoutRow {
  DetectMode mode;
  double snr_db;
  FalseAlarmCheck check;
};

struct SweepResult {
  std::vector<PdRow> pd;
  std::vector<ThresholdRow> thresholds;
  std::vector<HoldoutRow> holdout;

  std::vector<PdRow> curve(DetectMode m) const {
    std::vector<PdRow> out;
    for (const auto& r : pd)
      if (r.mode == m) out.push_back(r);
    return out;
  }
};

/**
 * Probability-of-detection curves for every configured mode over the SNR
 * grid. At each SNR point the variances are recomputed, the threshold is
 * recalibrated from trials_h0 null realizations and p_d is estimated from
 * trials_h1 target-present realizations. With holdout_trials > 0 every
 * threshold is also checked on an independent null batch.
 */
inline SweepResult sweep_snr(const ExperimentConfig& cfg) {
  cfg.validate_cfar();
  if (cfg.snr_grid_db.empty()) throw ConfigError("snr_grid_db is empty");
  TrialEngine engine(cfg);
  const auto& snrs = cfg.snr_grid_db;
  const auto& modes = cfg.modes;
  const std::size_t ns = snrs.size(), nm = modes.size();
  const auto h0 = engine.statistics(stream::h0, false, cfg.trials_h0, snrs, modes);
  const auto h1 = engine.statistics(stream::h1, true, cfg.trials_h1, snrs, modes);
  std::vector<double> ho;
  if (cfg.holdout_trials > 0) ho = engine.statistics(stream::holdout, false, cfg.holdout_trials, snrs, modes);

  SweepResult res;
  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t s = 0; s < ns; ++s) {
      const double thr = cfar_quantile(column(h0, cfg.trials_h0, ns, nm, s, m), cfg.cfar);
      res.thresholds.push_back({modes[m], snrs[s], thr});
      const auto lam1 = column(h1, cfg.trials_h1, ns, nm, s, m);
      const auto k = static_cast<std::size_t>(std::count_if(lam1.begin(), lam1.end(), [&](double l) { return l > thr; }));
      res.pd.push_back({modes[m], snrs[s], pd_from_counts(k, lam1.size())});
      if (cfg.holdout_trials > 0) {
        res.holdout.push_back({modes[m], snrs[s], false_alarm_check(column(ho, cfg.holdout_trials, ns, nm, s, m), thr, cfg.cfar)});
      }
    }
  }
  return res;
}

/// SNR at which the isotonic fit of a p_d curve first reaches @p level.
inline std::optional<double> snr_at_pd(const std::vector<PdRow>& curve, double level) {
  std::vector<double> x, y, w;
  for (const auto& r : curve) {
    x.push_back(r.snr_db);
    y.push_back(r.estimate.pd);
    w.push_back(static_cast<double>(std::max<std::size_t>(r.estimate.trials, 1)));
  }
  return crossing(x, isotonic_fit(y, w, true), level);
}

struct TargetAnnotation {
  std::size_t target = 0;
  std::size_t ix = 0, iy = 0;
  double x_m = 0.0, y_m = 0.0;
  Vec3 e_true = Vec3::Zero();
  Vec3 e_est = Vec3::Zero();
  double dphi = 0.0;
  double lambda = 0.0;
};

/// Test statistic over a grid of hypothesized positions, row-major in y: value(ix, iy).
struct StatImage {
  ImageGrid grid;
  DetectMode mode = DetectMode::dp_pol;
  Eigen::MatrixXd lambda;  // nx x ny
  std::vector<TargetAnnotation> targets;

  double value(std::size_t ix, std::size_t iy) const {
    return lambda(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(iy));
  }

  /// Not smaller than any of its (up to 8) neighbours.
  bool is_local_max(std::size_t ix, std::size_t iy) const {
    const double v = value(ix, iy);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        const long jx = static_cast<long>(ix) + dx, jy = static_cast<long>(iy) + dy;
        if (jx < 0 || jy < 0 || jx >= static_cast<long>(grid.nx) || jy >= static_cast<long>(grid.ny)) continue;
        if (value(static_cast<std::size_t>(jx), static_cast<std::size_t>(jy)) > v) return false;
      }
    return true;
  }

  std::pair<std::size_t, std::size_t> argmax() const {
    Eigen::Index i = 0, j = 0;
    lambda.maxCoeff(&i, &j);
    return {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
  }
};

/**
 * One realization of the configured scene (trial @p trial of the image
 * stream), evaluated on every grid node with the velocity fixed at the
 * configured hypothesis velocity. Each target gets the dipole estimate from
 * its nearest grid node.
 */
inline StatImage statistic_image(const ExperimentConfig& cfg, std::uint64_t trial = 0) {
  TrialEngine engine(cfg);
  const auto& grid = cfg.image;
  if (grid.nx == 0 || grid.ny == 0) throw ConfigError("image grid must be non-empty");
  const NoiseCov cov = engine.single_covariance();
  const DetectMode mode = cfg.image_mode;
  if (dp_mode_of(mode) == DpMode::with_dp && !cov.sigma2_dp) {
    throw ConfigError("direct-path image mode needs direct-path noise settings");
  }
  const auto z = engine.standard_noise(NoiseKey{cfg.seed, stream::image, trial});
  const SignalSet full = engine.realization(z, true, cov, cfg.noise.enabled);
  const auto rows = mode_rows(engine.channels(), mode);
  const SignalSet data = select_channels(full, rows);
  const NoiseCov sub_cov = cov.select(rows);
  const DpMode dpm = dp_mode_of(mode);

  StatImage img;
  img.grid = grid;
  img.mode = mode;
  img.lambda.resize(static_cast<Eigen::Index>(grid.nx), static_cast<Eigen::Index>(grid.ny));
  parallel_for(grid.nx * grid.ny, resolve_threads(cfg.threads), [&](std::size_t idx) {
    const std::size_t ix = idx % grid.nx, iy = idx / grid.nx;
    const Hypothesis h{Vec2(grid.x(ix), grid.y(iy)), cfg.hypothesis.v2};
    const auto st = steering(h, cfg.scene, data.channels);
    img.lambda(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(iy)) = glrt(data, sub_cov, st, dpm, false).lambda;
  });

  for (std::size_t t = 0; t < cfg.scene.targets.size(); ++t) {
    const auto& tg = cfg.scene.targets[t];
    TargetAnnotation a;
    a.target = t;
    a.ix = grid.nearest_x(tg.x2.x());
    a.iy = grid.nearest_y(tg.x2.y());
    a.x_m = grid.x(a.ix);
    a.y_m = grid.y(a.iy);
    a.e_true = tg.e_sc;
    const Hypothesis h{Vec2(a.x_m, a.y_m), cfg.hypothesis.v2};
    const auto out = detect(data, sub_cov, cfg.scene, h, dpm);
    a.e_est = *out.e_est;
    a.dphi = dipole_angle_error(a.e_est, a.e_true);
    a.lambda = out.lambda;
    img.targets.push_back(a);
  }
  return img;
}

struct DphiRow {
  DetectMode mode;
  double snr_db;
  double mean_dphi;
  double standard_error;
};

/**
 * Mean angle between true and estimated dipole lines over dipole_trials
 * realizations per SNR point, at the fixed hypothesis, for every mode. The
 * reference dipole is that of the first target.
 */
inline std::vector<DphiRow> mc_dipole(const ExperimentConfig& cfg) {
  if (cfg.scene.targets.empty()) throw ConfigError("mc_dipole needs a target");
  if (cfg.snr_grid_db.empty()) throw ConfigError("snr_grid_db is empty");
  TrialEngine engine(cfg);
  const auto& snrs = cfg.snr_grid_db;
  const auto& modes = cfg.modes;
  const std::size_t ns = snrs.size(), nm = modes.size(), n = cfg.dipole_trials;
  std::vector<NoiseCov> covs;
  for (double s : snrs) covs.push_back(engine.covariance_for_snr(s));
  std::vector<ModeView> views;
  for (auto m : modes) {
    if (dp_mode_of(m) == DpMode::with_dp && !cfg.noise.dp_snr_db) throw ConfigError("direct-path modes need noise.dp_snr_db");
    views.push_back(engine.view(m));
  }
  const Vec3 e_true = cfg.scene.targets.front().e_sc;

  std::vector<double> err(n * ns * nm);
  parallel_for(n, resolve_threads(cfg.threads), [&](std::size_t t) {
    const auto z = engine.standard_noise(NoiseKey{cfg.seed, stream::dipole, t});
    for (std::size_t s = 0; s < ns; ++s) {
      const SignalSet full = engine.realization(z, true, covs[s]);
      for (std::size_t m = 0; m < nm; ++m) {
        const auto& v = views[m];
        const SignalSet sub = select_channels(full, v.rows);
        const NoiseCov sub_cov = covs[s].select(v.rows);
        const auto out = glrt(sub, sub_cov, v.steer, dp_mode_of(v.mode), true);
        const auto est = estimate_dipole(out.w, cfg.scene, v.channels, cfg.hypothesis, sub_cov);
        err[(t * ns + s) * nm + m] = dipole_angle_error(est.e, e_true);
      }
    }
  });

  std::vector<DphiRow> rows;
  for (std::size_t m = 0; m < nm; ++m)
    for (std::size_t s = 0; s < ns; ++s) {
      const auto col = column(err, n, ns, nm, s, m);
      rows.push_back({modes[m], snrs[s], mean(col), standard_error(col)});
    }
  return rows;
}

struct SingleDetection {
  DetectionOutput output;
  std::optional<double> dphi;  // against the first target's dipole
  SignalSet data;
  NoiseCov cov;
};

/// One realization (trial of the single stream) evaluated at the configured hypothesis.
inline SingleDetection detect_once(const ExperimentConfig& cfg, DetectMode mode, std::uint64_t trial = 0) {
  TrialEngine engine(cfg);
  const NoiseCov cov = engine.single_covariance();
  if (dp_mode_of(mode) == DpMode::with_dp && !cov.sigma2_dp) {
    throw ConfigError("direct-path mode needs direct-path noise settings");
  }
  const auto z = engine.standard_noise(NoiseKey{cfg.seed, stream::single, trial});
  const SignalSet full = engine.realization(z, true, cov, cfg.noise.enabled);
  const auto rows = mode_rows(engine.channels(), mode);
  SingleDetection r;
  r.data = select_channels(full, rows);
  r.cov = cov.select(rows);
  r.output = detect(r.data, r.cov, cfg.scene, cfg.hypothesis, dp_mode_of(mode));
  if (!cfg.scene.targets.empty()) r.dphi = dipole_angle_error(*r.output.e_est, cfg.scene.targets.front().e_sc);
  return r;
}

}  // namespace polglrt
