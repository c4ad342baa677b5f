#pragma once

// White circular complex Gaussian measurement noise and SNR-to-variance
// conversion.
//
// Continuous white noise with E[n(w) n(w')^*] = sigma^2 delta(w - w') is
// realized on the grid with per-bin variance sigma^2 / delta_omega, so sums
// weighted by delta_omega behave like the continuous integrals.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polglrt/errors.hpp"
#include "polglrt/scene.hpp"

namespace polglrt {

/// Diagonals of the target-path and direct-path noise covariances.
struct NoiseCov {
  Eigen::VectorXd sigma2_tp;
  std::optional<Eigen::VectorXd> sigma2_dp;

  static NoiseCov common(std::size_t channels, double s2_tp, std::optional<double> s2_dp = {}) {
    NoiseCov c;
    c.sigma2_tp = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(channels), s2_tp);
    if (s2_dp) c.sigma2_dp = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(channels), *s2_dp);
    return c;
  }

  void validate() const {
    auto check = [](const Eigen::VectorXd& v, const char* which) {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v(i) > 0.0) || !std::isfinite(v(i))) {
          throw ConfigError(std::string("noise variance for ") + which + " channel " +
                            std::to_string(i) + " must be positive and finite");
        }
      }
    };
    check(sigma2_tp, "target-path");
    if (sigma2_dp) {
      if (sigma2_dp->size() != sigma2_tp.size()) throw ConfigError("TP/DP variance lists differ in length");
      check(*sigma2_dp, "direct-path");
    }
  }

  NoiseCov select(const std::vector<Eigen::Index>& rows) const {
    NoiseCov out;
    out.sigma2_tp.resize(static_cast<Eigen::Index>(rows.size()));
    if (sigma2_dp) out.sigma2_dp = Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.sigma2_tp(static_cast<Eigen::Index>(i)) = sigma2_tp(rows[i]);
      if (sigma2_dp) (*out.sigma2_dp)(static_cast<Eigen::Index>(i)) = (*sigma2_dp)(rows[i]);
    }
    return out;
  }
};

enum class Path : std::uint64_t { target = 1, direct = 2 };

/// Identifies one noise realization: root seed, experiment stream, trial.
struct NoiseKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t trial = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seed for the generator of one (realization, path, channel) stream.
inline std::uint64_t channel_seed(const NoiseKey& key, Path path, std::uint64_t channel_key) {
  std::uint64_t h = detail::splitmix64(key.seed);
  h = detail::splitmix64(h ^ (key.stream + 0x1000));
  h = detail::splitmix64(h ^ (key.trial + 0x2000));
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(path));
  h = detail::splitmix64(h ^ (channel_key + 0x3000));
  return h;
}

/// Unit-variance circular complex Gaussian row for one channel (E|z|^2 = 1).
inline void standard_noise_row(Eigen::Ref<Eigen::RowVectorXcd, 0, Eigen::InnerStride<>> row, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    const double re = nd(gen);
    const double im = nd(gen);
    row(i) = cplx(re, im);
  }
}

/**
 * Noise for the given channels with per-bin variance sigma2[c] / delta_omega.
 *
 * Each channel draws from its own generator keyed by (key, path, channel key),
 * so any subset of channels reproduces the same samples it would have in the
 * full scene.
 */
inline Eigen::MatrixXcd sample_noise(const std::vector<Channel>& channels, const FrequencyGrid& grid,
                                     const Eigen::VectorXd& sigma2, const NoiseKey& key, Path path) {
  if (static_cast<std::size_t>(sigma2.size()) != channels.size()) {
    throw ConfigError("sample_noise: variance list does not match channel count");
  }
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(channels.size()), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const double s2 = sigma2(static_cast<Eigen::Index>(c));
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw ConfigError("sample_noise: variance must be positive");
    auto row = out.row(static_cast<Eigen::Index>(c));
    standard_noise_row(row, channel_seed(key, path, channels[c].key()));
    row *= std::sqrt(s2 / grid.delta_omega);
  }
  return out;
}

/**
 * How an "average SNR" maps to a noise level.
 *
 * energy:     SNR = mean over channels of (delta_omega sum_w |d(w)|^2) / sigma^2
 * per_sample: SNR = mean over channels and bins of |d(w)|^2 / (sigma^2 / delta_omega)
 *
 * They differ by the factor N (sample count).
 */
enum class SnrConvention { energy, per_sample };

inline SnrConvention snr_convention_from_string(const std::string& s) {
  if (s == "energy") return SnrConvention::energy;
  if (s == "per_sample") return SnrConvention::per_sample;
  throw ConfigError("unknown snr_convention '" + s + "'");
}

inline const char* to_string(SnrConvention c) {
  return c == SnrConvention::energy ? "energy" : "per_sample";
}

/// Common variance sigma^2 producing the requested channel-averaged SNR.
inline double snr_to_variance(const Eigen::MatrixXcd& signal, const FrequencyGrid& grid, double snr_db,
                              SnrConvention convention = SnrConvention::energy) {
  if (signal.rows() == 0 || signal.cols() == 0) throw ConfigError("snr_to_variance: empty signal");
  const double energy = grid.delta_omega * signal.cwiseAbs2().sum() / static_cast<double>(signal.rows());
  if (!(energy > 0.0)) throw ConfigError("snr_to_variance: signal is identically zero, SNR undefined");
  double s2 = energy / std::pow(10.0, snr_db / 10.0);
  if (convention == SnrConvention::per_sample) s2 /= static_cast<double>(signal.cols());
  return s2;
}

}  // namespace polglrt
