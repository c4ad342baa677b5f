#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "polglrt/polglrt.hpp"

namespace testing {

using namespace polglrt;

inline Eigen::MatrixXcd random_complex(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = cplx(nd(gen), nd(gen));
  return m;
}

inline Eigen::MatrixXcd random_psd(Eigen::Index n, Eigen::Index rank, std::mt19937_64& gen) {
  const Eigen::MatrixXcd b = random_complex(n, rank, gen);
  return b * b.adjoint();
}

inline Vec3 random_unit(std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Vec3 v(nd(gen), nd(gen), nd(gen));
  return v.normalized();
}

/// Circular scene with a short grid so tests stay fast.
inline SceneConfig small_scene(std::size_t receivers, std::size_t samples = 32, Triple dipole = {0.3, 0.5, 0.8}) {
  StandardSceneOptions o;
  o.receivers = receivers;
  o.target_dipole = dipole;
  SceneConfig c = standard_scene(o);
  c.waveform.n_samples = samples;
  return c;
}

/// Random data set on the channels of @p scene (both paths).
inline SignalSet random_data(const Scene& scene, std::mt19937_64& gen, double tp_scale = 1.0) {
  SignalSet s;
  s.channels = scene.channels();
  s.grid = scene.waveform.grid;
  const auto m = static_cast<Eigen::Index>(s.channels.size());
  const auto n = static_cast<Eigen::Index>(s.grid.size());
  s.tp = tp_scale * random_complex(m, n, gen);
  s.dp = random_complex(m, n, gen);
  return s;
}

inline NoiseCov random_cov(std::size_t m, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  NoiseCov c;
  c.sigma2_tp.resize(static_cast<Eigen::Index>(m));
  c.sigma2_dp = Eigen::VectorXd(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    c.sigma2_tp(static_cast<Eigen::Index>(i)) = u(gen);
    (*c.sigma2_dp)(static_cast<Eigen::Index>(i)) = u(gen);
  }
  return c;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace testing
