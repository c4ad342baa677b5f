#pragma once

/**
 * @file forward_model.hpp
 * @brief Noise-free target-path and direct-path baseband spectra.
 *
 * Every receiver channel (k, p) sees, for each baseband frequency omega,
 *
 *   d_kp(omega) = sum_targets w0^2 exp(i (omega + alpha_k w0) phi_k / c0)
 *                 A_t p~(omega) A_kp r_kp . q
 *
 * with alpha_k the Doppler scale, phi_k the Doppler-weighted bistatic path,
 * A_t and A_kp isotropic free-space spreading factors times antenna gains, r_kp
 * the receive dipole projected transverse to the target-to-receiver look and q
 * the scattering vector of the target. The direct path carries the waveform
 * straight from the transmitter with phase (omega + w0) |a_k - a_t| / c0.
 */

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "polglrt/errors.hpp"
#include "polglrt/geometry.hpp"
#include "polglrt/scene.hpp"
#include "polglrt/target_model.hpp"

namespace polglrt {

/// Target speeds must stay below this fraction of c0.
inline constexpr double kMaxSpeedFraction = 1e-3;

struct DopplerFactors {
  double alpha_r = 1.0;
  double alpha_t = 1.0;
  double alpha = 1.0;  // alpha_t / alpha_r
};

inline DopplerFactors doppler_factors(const Vec3& x, const Vec3& v, const Vec3& rx, const Vec3& tx,
                                      double c0 = kSpeedOfLight) {
  if (!(v.norm() < kMaxSpeedFraction * c0)) {
    throw ModelValidityError("doppler_factors: |v| must be below 1e-3 c0");
  }
  DopplerFactors f;
  f.alpha_r = 1.0 - unit_toward(rx, x).dot(v) / c0;
  f.alpha_t = 1.0 + unit_toward(tx, x).dot(v) / c0;
  f.alpha = f.alpha_t / f.alpha_r;
  return f;
}

/// phi = |x - a_r| + |x - a_t| / alpha, in meters.
inline double bistatic_phase(const Vec3& x, const Vec3& v, const Vec3& rx, const Vec3& tx,
                             double c0 = kSpeedOfLight) {
  const auto f = doppler_factors(x, v, rx, tx, c0);
  return (x - rx).norm() + (x - tx).norm() / f.alpha;
}

/// 1 / (4 pi r): free-space spreading between two points.
inline double spreading(const Vec3& a, const Vec3& b) {
  const double r = (a - b).norm();
  if (!(r > 0.0)) throw GeometryError("spreading: coincident points");
  return 1.0 / (4.0 * std::numbers::pi * r);
}

using ReceiveMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/**
 * Rows gain_p * r_p^T, one per antenna of @p rx, with r_p the antenna dipole
 * projected transverse to the receiver-to-@p x look direction.
 */
inline ReceiveMatrix receive_matrix(const Vec3& x, const Receiver& rx) {
  const Vec3 look = unit_toward(rx.position, x);
  ReceiveMatrix m(static_cast<Eigen::Index>(rx.antennas.size()), 3);
  for (std::size_t a = 0; a < rx.antennas.size(); ++a) {
    const auto& ant = rx.antennas[a];
    m.row(static_cast<Eigen::Index>(a)) = ant.gain * transverse_project(ant.dipole, look).transpose();
  }
  return m;
}

/// Stacked receive matrix over all channels, spreading to @p x included.
inline Eigen::MatrixXd stacked_receive_matrix(const Vec3& x, const Scene& scene,
                                              const std::vector<Channel>& channels) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(channels.size()), 3);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& rx = scene.receivers.at(channels[c].receiver);
    const Vec3 look = unit_toward(rx.position, x);
    const auto& ant = rx.antennas.at(channels[c].antenna);
    a.row(static_cast<Eigen::Index>(c)) =
        ant.gain * spreading(x, rx.position) * transverse_project(ant.dipole, look).transpose();
  }
  return a;
}

/// Complex spectra on the baseband grid, one row per channel.
struct SignalSet {
  std::vector<Channel> channels;
  Eigen::MatrixXcd tp;
  std::optional<Eigen::MatrixXcd> dp;
  FrequencyGrid grid;

  std::size_t channel_count() const { return channels.size(); }
  bool has_dp() const { return dp.has_value(); }
};

inline void check_channels(const Scene& scene, const std::vector<Channel>& channels) {
  for (const auto& ch : channels) {
    if (ch.receiver >= scene.receivers.size() ||
        ch.antenna >= scene.receivers[ch.receiver].antennas.size() ||
        scene.receivers[ch.receiver].antennas[ch.antenna].pol != ch.pol) {
      throw ModeError("channel list does not match the scene");
    }
  }
}

/// Target-path contribution of a single target.
inline Eigen::MatrixXcd target_path_signal(const Scene& scene, const PointTarget& target,
                                           const std::vector<Channel>& channels) {
  check_channels(scene, channels);
  const auto& wf = scene.waveform;
  const auto n = static_cast<Eigen::Index>(wf.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(channels.size()), n);

  const auto st = lift_state(target.x2, target.v2, scene.topography);
  const Vec3 q = scatter_coupling(st.position, target.rho, target.e_sc, scene.tx);
  const double a_t = scene.tx.gain * spreading(st.position, scene.tx.position);
  const double w0 = wf.omega0;

  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& rx = scene.receivers[channels[c].receiver];
    const auto& ant = rx.antennas[channels[c].antenna];
    const auto dop = doppler_factors(st.position, st.velocity, rx.position, scene.tx.position, scene.c0);
    const double phi = (st.position - rx.position).norm() + (st.position - scene.tx.position).norm() / dop.alpha;
    const Vec3 look = unit_toward(rx.position, st.position);
    const double coupling = ant.gain * spreading(st.position, rx.position) *
                            transverse_project(ant.dipole, look).dot(q);
    const double amp = w0 * w0 * a_t * coupling;
    if (amp == 0.0) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double phase = (wf.grid.omega(i) + dop.alpha * w0) * phi / scene.c0;
      out(static_cast<Eigen::Index>(c), i) = amp * std::polar(1.0, phase) * wf.p_tilde(i);
    }
  }
  return out;
}

/// Superposition of every target in the scene.
inline Eigen::MatrixXcd target_path_signal(const Scene& scene, const std::vector<Channel>& channels) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(channels.size()),
                                                static_cast<Eigen::Index>(scene.waveform.size()));
  for (const auto& t : scene.targets) out += target_path_signal(scene, t, channels);
  return out;
}

/**
 * Direct-path spectra. The transmit dipole seen at receiver k couples into
 * antenna p through the receive dipole projected transverse to the
 * receiver-to-transmitter line; by the triple-product identity this equals the
 * transmit dipole projected transverse to the same line dotted with the
 * receive dipole.
 *
 * Amplitude: A_t evaluated at the receiver (transmit gain times spreading over
 * the baseline) times the antenna's direct-path gain, which carries no
 * target-to-receiver spreading.
 */
inline Eigen::MatrixXcd direct_path_signal(const Scene& scene, const std::vector<Channel>& channels) {
  check_channels(scene, channels);
  const auto& wf = scene.waveform;
  const auto n = static_cast<Eigen::Index>(wf.size());
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(channels.size()), n);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& rx = scene.receivers[channels[c].receiver];
    const auto& ant = rx.antennas[channels[c].antenna];
    const Vec3 look = unit_toward(rx.position, scene.tx.position);
    const double baseline = (rx.position - scene.tx.position).norm();
    const double a_t = scene.tx.gain * spreading(rx.position, scene.tx.position);
    const double amp = a_t * ant.dp_gain * transverse_project(ant.dipole, look).dot(scene.tx.dipole);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double phase = (wf.grid.omega(i) + wf.omega0) * baseline / scene.c0;
      out(static_cast<Eigen::Index>(c), i) = amp * std::polar(1.0, phase) * wf.p_tilde(i);
    }
  }
  return out;
}

/// Noise-free signal set for every channel of the scene.
inline SignalSet synthesize(const Scene& scene, bool with_dp) {
  SignalSet s;
  s.channels = scene.channels();
  s.grid = scene.waveform.grid;
  s.tp = target_path_signal(scene, s.channels);
  if (with_dp) s.dp = direct_path_signal(scene, s.channels);
  return s;
}

/// Keep only the listed rows (by position in @p set.channels).
inline SignalSet select_channels(const SignalSet& set, const std::vector<Eigen::Index>& rows) {
  SignalSet out;
  out.grid = set.grid;
  out.tp.resize(static_cast<Eigen::Index>(rows.size()), set.tp.cols());
  if (set.dp) out.dp = Eigen::MatrixXcd(static_cast<Eigen::Index>(rows.size()), set.dp->cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.channels.push_back(set.channels.at(static_cast<std::size_t>(rows[i])));
    out.tp.row(static_cast<Eigen::Index>(i)) = set.tp.row(rows[i]);
    if (set.dp) out.dp->row(static_cast<Eigen::Index>(i)) = set.dp->row(rows[i]);
  }
  return out;
}

}  // namespace polglrt
