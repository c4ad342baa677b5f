#pragma once

// Scene description: transmitter, polarimetric receivers, targets, waveform
// and the baseband frequency grid.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polglrt/errors.hpp"
#include "polglrt/geometry.hpp"
#include "polglrt/target_model.hpp"

namespace polglrt {

enum class Polarization : int { H = 0, V = 1 };

inline const char* to_string(Polarization p) { return p == Polarization::H ? "H" : "V"; }

/// One dipole of a receiver. `dp_gain` scales the direct-path channel.
struct ReceiveAntenna {
  Polarization pol = Polarization::H;
  Vec3 dipole = Vec3::UnitX();
  double gain = 1.0;
  double dp_gain = 1.0;
};

struct Receiver {
  Vec3 position = Vec3::Zero();
  std::vector<ReceiveAntenna> antennas;  // H first, then V when present
};

/// A measurement channel: receiver index plus polarization.
struct Channel {
  std::size_t receiver = 0;
  Polarization pol = Polarization::H;
  std::size_t antenna = 0;  // index into Receiver::antennas

  /// Stable identifier of the physical channel, independent of which
  /// channels a scene happens to keep.
  std::uint64_t key() const { return 2 * static_cast<std::uint64_t>(receiver) + static_cast<int>(pol); }
  bool operator==(const Channel&) const = default;
};

/// Uniform grid over [-B/2, B/2] in rad/s with Riemann weight B/(N-1).
struct FrequencyGrid {
  Eigen::VectorXd omega;
  double delta_omega = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(omega.size()); }

  static FrequencyGrid make(double bandwidth_rad, std::size_t n) {
    if (n < 2) throw ConfigError("frequency grid needs at least 2 samples");
    if (!(bandwidth_rad > 0.0)) throw ConfigError("bandwidth must be positive");
    FrequencyGrid g;
    g.omega = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), -0.5 * bandwidth_rad,
                                         0.5 * bandwidth_rad);
    g.delta_omega = bandwidth_rad / static_cast<double>(n - 1);
    return g;
  }
};

enum class WaveformKind { random_phase, flat, lfm };

inline WaveformKind waveform_kind_from_string(const std::string& s) {
  if (s == "random_phase") return WaveformKind::random_phase;
  if (s == "flat") return WaveformKind::flat;
  if (s == "lfm") return WaveformKind::lfm;
  throw ConfigError("unknown waveform kind '" + s + "'");
}

inline const char* to_string(WaveformKind k) {
  switch (k) {
    case WaveformKind::random_phase: return "random_phase";
    case WaveformKind::flat: return "flat";
    case WaveformKind::lfm: return "lfm";
  }
  return "?";
}

/// Baseband transmit spectrum p~(omega) sampled on the grid.
struct Waveform {
  double omega0 = 0.0;     // rad/s
  double bandwidth = 0.0;  // rad/s
  FrequencyGrid grid;
  Eigen::VectorXcd p_tilde;

  std::size_t size() const { return grid.size(); }

  static Waveform make(double f0_hz, double bandwidth_hz, std::size_t n, WaveformKind kind,
                       std::uint64_t seed) {
    Waveform w;
    w.omega0 = 2.0 * std::numbers::pi * f0_hz;
    w.bandwidth = 2.0 * std::numbers::pi * bandwidth_hz;
    w.grid = FrequencyGrid::make(w.bandwidth, n);
    w.p_tilde.resize(static_cast<Eigen::Index>(n));
    switch (kind) {
      case WaveformKind::flat:
        w.p_tilde.setOnes();
        break;
      case WaveformKind::random_phase: {
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        for (auto& s : w.p_tilde) s = std::polar(1.0, phase(gen));
        break;
      }
      case WaveformKind::lfm: {
        // Quadratic spectral phase: a chirp sweeping the band once.
        const double nn = static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double u = static_cast<double>(i) / (nn - 1.0) - 0.5;
          w.p_tilde(static_cast<Eigen::Index>(i)) = std::polar(1.0, std::numbers::pi * nn * u * u);
        }
        break;
      }
    }
    return w;
  }
};

struct Scene {
  double c0 = kSpeedOfLight;
  AntennaPose tx;
  std::vector<Receiver> receivers;
  std::vector<PointTarget> targets;
  Topography topography;
  Waveform waveform;

  std::vector<Channel> channels() const {
    std::vector<Channel> out;
    for (std::size_t k = 0; k < receivers.size(); ++k)
      for (std::size_t a = 0; a < receivers[k].antennas.size(); ++a)
        out.push_back(Channel{k, receivers[k].antennas[a].pol, a});
    return out;
  }

  /// Copy with every V antenna removed (the non-polarimetric configuration).
  Scene horizontal_only() const {
    Scene s = *this;
    for (auto& r : s.receivers) {
      std::erase_if(r.antennas, [](const ReceiveAntenna& a) { return a.pol != Polarization::H; });
    }
    return s;
  }
};

}  // namespace polglrt
