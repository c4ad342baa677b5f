#pragma once

/**
 * @file detector.hpp
 * @brief GLRT detection statistics, waveform MLE, the reduced objective and
 *        target dipole estimation.
 *
 * Notation used below. For a hypothesis (x_h, v_h) the steering phases D(w)
 * undo the hypothesized propagation phase per channel. Stacking target-path
 * rows above direct-path rows gives the steered data y(w) = D~(w)^H d~(w) and
 * the diagonal noise covariance S~ = diag(S_tp, S_dp). Then
 *
 *   Q1 = dw sum_w y(w) y(w)^H               (both paths)
 *   Q0 = dw sum_w y_dp(w) y_dp(w)^H          (direct path only)
 *   R  = dw sum_w y_tp(w) y_tp(w)^H          (target path only)
 *
 *   with DP:     lambda = lmax(S~^-1/2 Q1 S~^-1/2) - lmax(S_dp^-1/2 Q0 S_dp^-1/2)
 *   without DP:  lambda = lmax(S_tp^-1/2 R S_tp^-1/2)
 *
 * The whitened Q0 is a principal submatrix of the whitened Q1, so by
 * eigenvalue interlacing the DP statistic is never negative.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "polglrt/errors.hpp"
#include "polglrt/forward_model.hpp"
#include "polglrt/geometry.hpp"
#include "polglrt/hermitian_eigen.hpp"
#include "polglrt/noise_model.hpp"
#include "polglrt/scene.hpp"

namespace polglrt {

enum class DpMode { with_dp, no_dp };

struct Hypothesis {
  Vec2 x2 = Vec2::Zero();
  Vec2 v2 = Vec2::Zero();
};

/// Unit-modulus steering phases, channels x frequencies.
struct SteeringSet {
  Eigen::MatrixXcd tp;
  Eigen::MatrixXcd dp;
};

inline SteeringSet steering(const Hypothesis& hyp, const Scene& scene, const std::vector<Channel>& channels) {
  check_channels(scene, channels);
  const auto st = lift_state(hyp.x2, hyp.v2, scene.topography);
  const auto& wf = scene.waveform;
  const auto n = static_cast<Eigen::Index>(wf.size());
  const auto m = static_cast<Eigen::Index>(channels.size());
  SteeringSet s;
  s.tp.resize(m, n);
  s.dp.resize(m, n);
  for (Eigen::Index c = 0; c < m; ++c) {
    const auto& rx = scene.receivers[channels[static_cast<std::size_t>(c)].receiver];
    const auto dop = doppler_factors(st.position, st.velocity, rx.position, scene.tx.position, scene.c0);
    const double phi = (st.position - rx.position).norm() + (st.position - scene.tx.position).norm() / dop.alpha;
    const double baseline = (rx.position - scene.tx.position).norm();
    if (!(baseline > 0.0)) throw GeometryError("steering: receiver coincides with transmitter");
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = wf.grid.omega(i);
      s.tp(c, i) = std::polar(1.0, (w + dop.alpha * wf.omega0) * phi / scene.c0);
      s.dp(c, i) = std::polar(1.0, (w + wf.omega0) * baseline / scene.c0);
    }
  }
  return s;
}

/// Steered data y = D^H d with TP rows above DP rows (DP only in with_dp mode).
inline Eigen::MatrixXcd steered_stack(const SignalSet& data, const SteeringSet& steer, DpMode mode) {
  if (steer.tp.rows() != data.tp.rows() || steer.tp.cols() != data.tp.cols()) {
    throw ModeError("steering and data shapes differ");
  }
  const auto m = data.tp.rows();
  const auto n = data.tp.cols();
  if (mode == DpMode::no_dp) return steer.tp.conjugate().cwiseProduct(data.tp);
  if (!data.dp) throw ModeError("with_dp mode requires direct-path data");
  if (steer.dp.rows() != m || data.dp->rows() != m || data.dp->cols() != n) {
    throw ModeError("direct-path shapes differ");
  }
  Eigen::MatrixXcd y(2 * m, n);
  y.topRows(m) = steer.tp.conjugate().cwiseProduct(data.tp);
  y.bottomRows(m) = steer.dp.conjugate().cwiseProduct(*data.dp);
  return y;
}

/// Stacked noise variances matching steered_stack.
inline Eigen::VectorXd stacked_variances(const NoiseCov& cov, std::size_t channels, DpMode mode) {
  cov.validate();
  if (static_cast<std::size_t>(cov.sigma2_tp.size()) != channels) {
    throw ModeError("covariance does not match channel count");
  }
  if (mode == DpMode::no_dp) return cov.sigma2_tp;
  if (!cov.sigma2_dp) throw ModeError("with_dp mode requires direct-path variances");
  Eigen::VectorXd s(2 * cov.sigma2_tp.size());
  s << cov.sigma2_tp, *cov.sigma2_dp;
  return s;
}

struct CorrelationSet {
  Eigen::MatrixXcd q1;  // both paths (empty in no_dp mode)
  Eigen::MatrixXcd q0;  // direct path (empty in no_dp mode)
  Eigen::MatrixXcd r;   // target path
};

inline CorrelationSet correlations(const SignalSet& data, const SteeringSet& steer, DpMode mode) {
  const double dw = data.grid.delta_omega;
  const Eigen::MatrixXcd y = steered_stack(data, steer, mode);
  CorrelationSet out;
  const auto m = data.tp.rows();
  if (mode == DpMode::no_dp) {
    out.r.noalias() = dw * (y * y.adjoint());
    return out;
  }
  out.q1.noalias() = dw * (y * y.adjoint());
  out.r = out.q1.topLeftCorner(m, m);
  out.q0 = out.q1.bottomRightCorner(m, m);
  return out;
}

/// S^-1/2 Q S^-1/2 for diagonal S.
inline Eigen::MatrixXcd whiten(const Eigen::MatrixXcd& q, const Eigen::VectorXd& sigma2) {
  const Eigen::VectorXd inv_sqrt = sigma2.cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * q * inv_sqrt.asDiagonal();
}

struct DetectionOutput {
  double lambda = 0.0;
  double lambda_full = 0.0;  // lmax of the whitened Q1 (or R)
  double lambda_dp = 0.0;    // lmax of the whitened Q0; 0 without DP
  Eigen::VectorXcd w;        // dominant eigenvector of the whitened Q1 (or R)
  bool degenerate = false;   // top two eigenvalues within 1e-9 relative
  std::optional<Vec3> e_est;
};

/// Statistic from precomputed correlations.
inline DetectionOutput glrt(const CorrelationSet& corr, const NoiseCov& cov, DpMode mode,
                            bool want_vector = true) {
  const auto m = corr.r.rows();
  const Eigen::VectorXd s2 = stacked_variances(cov, static_cast<std::size_t>(m), mode);
  DetectionOutput out;
  const Eigen::MatrixXcd& q = (mode == DpMode::with_dp) ? corr.q1 : corr.r;
  const Eigen::MatrixXcd wq = whiten(q, s2);
  if (want_vector) {
    const auto top = dominant_eigenpair(wq);
    out.lambda_full = top.value;
    out.w = top.vector;
    out.degenerate = top.degenerate;
  } else {
    out.lambda_full = max_eigenvalue(wq);
  }
  if (mode == DpMode::with_dp) {
    // Whitening is diagonal, so the whitened Q0 is the lower-right block.
    out.lambda_dp = max_eigenvalue(wq.bottomRightCorner(m, m));
  }
  out.lambda = out.lambda_full - out.lambda_dp;
  return out;
}

inline DetectionOutput glrt(const SignalSet& data, const NoiseCov& cov, const SteeringSet& steer, DpMode mode,
                            bool want_vector = true) {
  return glrt(correlations(data, steer, mode), cov, mode, want_vector);
}

inline DetectionOutput glrt(const SignalSet& data, const NoiseCov& cov, const Scene& scene,
                            const Hypothesis& hyp, DpMode mode, bool want_vector = true) {
  return glrt(data, cov, steering(hyp, scene, data.channels), mode, want_vector);
}

/// dw * sum_w f(w)^H S^-1 f(w)
inline double weighted_norm2(const Eigen::MatrixXcd& f, const Eigen::VectorXd& sigma2, double dw) {
  return dw * (sigma2.cwiseInverse().asDiagonal() * f.cwiseAbs2()).sum();
}

/**
 * Maximum-likelihood waveform spectrum for a fixed stacked signature s~:
 * p(w) = s~^H S~^-1 y(w) / (s~^H S~^-1 s~).
 */
inline Eigen::VectorXcd mle_waveform(const Eigen::VectorXcd& s_tilde, const SignalSet& data,
                                     const SteeringSet& steer, const NoiseCov& cov, DpMode mode) {
  const Eigen::MatrixXcd y = steered_stack(data, steer, mode);
  const Eigen::VectorXd s2 = stacked_variances(cov, data.channel_count(), mode);
  if (s_tilde.size() != y.rows()) throw ModeError("mle_waveform: signature length mismatch");
  const Eigen::VectorXcd ws = s2.cwiseInverse().asDiagonal() * s_tilde;  // S^-1 s
  const double denom = s_tilde.dot(ws).real();
  if (!(denom > 0.0)) throw ModeError("mle_waveform: zero signature");
  // s^H S^-1 y(w) for every w, as a row; dot() conjugates its first argument.
  return (ws.adjoint() * y).transpose() / denom;
}

struct ObjectiveValue {
  double j = 0.0;
  /// dJ/dRe(s) + i dJ/dIm(s), i.e. twice the Wirtinger derivative dJ/ds*.
  Eigen::VectorXcd grad;
};

/**
 * Reduced objective J(s~) = dw sum_w |y(w)^H S~^-1 s~|^2 / (s~^H S~^-1 s~)
 * and its real-coordinate gradient
 *   grad = 2 / (s~^H S~^-1 s~) (S~^-1 Q1 S~^-1 - J S~^-1) s~.
 * J is evaluated frequency by frequency; the gradient goes through Q1.
 */
inline ObjectiveValue objective_j(const Eigen::VectorXcd& s_tilde, const SignalSet& data,
                                  const SteeringSet& steer, const NoiseCov& cov, DpMode mode) {
  const Eigen::MatrixXcd y = steered_stack(data, steer, mode);
  const Eigen::VectorXd s2 = stacked_variances(cov, data.channel_count(), mode);
  if (s_tilde.size() != y.rows()) throw ModeError("objective_j: signature length mismatch");
  const double dw = data.grid.delta_omega;
  const Eigen::VectorXcd ws = s2.cwiseInverse().asDiagonal() * s_tilde;
  const double denom = s_tilde.dot(ws).real();
  if (!(denom > 0.0)) throw ModeError("objective_j: zero signature");

  ObjectiveValue out;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.cols(); ++i) acc += std::norm(y.col(i).dot(ws));
  out.j = dw * acc / denom;

  const Eigen::MatrixXcd q1 = dw * (y * y.adjoint());
  out.grad = (2.0 / denom) * (s2.cwiseInverse().asDiagonal() * (q1 * ws) - out.j * ws);
  return out;
}

struct DipoleEstimate {
  Vec3 e = Vec3::Zero();
  int rank = 0;
  bool rank_deficient = false;
};

/// Moore-Penrose pseudoinverse through the SVD; singular values below
/// rel_cutoff * sigma_max are dropped. Returns the numerical rank.
inline int pseudo_inverse(const Eigen::MatrixXd& a, Eigen::MatrixXd& pinv, double rel_cutoff = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_cutoff * sv(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) {
      inv(i) = 1.0 / sv(i);
      ++rank;
    }
  }
  pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return rank;
}

/// Real unit vector best aligned (as a line) with a complex 3-vector.
inline Vec3 real_line(const Eigen::Vector3cd& c) {
  const Eigen::Matrix3d m = (c * c.adjoint()).real();
  const auto eig = eigh_jacobi<double>(Eigen::MatrixXd(m), 1e-15);
  Vec3 e = eig.vectors.col(2);
  const double n = e.norm();
  if (!(n > 0.0)) return Vec3::Zero();
  e /= n;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(e(i)) > 1e-12) {
      if (e(i) < 0.0) e = -e;
      break;
    }
  }
  return e;
}

/**
 * Target dipole direction from the dominant eigenvector w.
 *
 * The target-path part of w estimates S_tp^-1/2 r_e up to a complex scalar,
 * and r_e is A_r q with A_r the stacked receive matrix at the hypothesized
 * position. The estimate is the real line through A_r^+ S_tp^1/2 w_tp. When
 * A_r has rank < 3 the estimate lies in its row space and rank_deficient is
 * set.
 */
inline DipoleEstimate estimate_dipole(const Eigen::VectorXcd& w, const Scene& scene,
                                      const std::vector<Channel>& channels, const Hypothesis& hyp,
                                      const NoiseCov& cov) {
  const auto m = static_cast<Eigen::Index>(channels.size());
  if (w.size() < m) throw ModeError("estimate_dipole: eigenvector shorter than channel count");
  if (cov.sigma2_tp.size() != m) throw ModeError("estimate_dipole: covariance does not match channels");
  const auto st = lift_state(hyp.x2, hyp.v2, scene.topography);
  const Eigen::MatrixXd a_r = stacked_receive_matrix(st.position, scene, channels);
  Eigen::MatrixXd pinv;
  DipoleEstimate out;
  out.rank = pseudo_inverse(a_r, pinv);
  out.rank_deficient = out.rank < 3;
  const Eigen::VectorXcd unwhitened = cov.sigma2_tp.cwiseSqrt().cast<cplx>().asDiagonal() * w.head(m);
  const Eigen::Vector3cd c = pinv.cast<cplx>() * unwhitened;
  out.e = real_line(c);
  return out;
}

/// Angle in [0, pi/2] between two lines through the origin.
inline double dipole_angle_error(const Vec3& e_est, const Vec3& e_true) {
  const double denom = e_est.norm() * e_true.norm();
  if (!(denom > 0.0)) return std::numbers::pi / 2.0;
  const double c = std::clamp(std::abs(e_est.dot(e_true)) / denom, 0.0, 1.0);
  return std::acos(c);
}

/// Statistic plus dipole estimate at one hypothesis.
inline DetectionOutput detect(const SignalSet& data, const NoiseCov& cov, const Scene& scene,
                              const Hypothesis& hyp, DpMode mode) {
  auto out = glrt(data, cov, scene, hyp, mode, true);
  out.e_est = estimate_dipole(out.w, scene, data.channels, hyp, cov).e;
  return out;
}

}  // namespace polglrt
