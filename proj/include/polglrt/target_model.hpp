#pragma once

// Dipole target model: a symmetric permittivity-perturbation dyad reduced to
// its dominant dipole, and the coupling of an incident transverse field into
// that dipole.

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "polglrt/errors.hpp"
#include "polglrt/geometry.hpp"
#include "polglrt/hermitian_eigen.hpp"

namespace polglrt {

using Dyad = Eigen::Matrix3d;

struct AntennaPose {
  Vec3 position = Vec3::Zero();
  Vec3 dipole = Vec3::UnitX();
  double gain = 1.0;
};

/// Point scatterer on the ground. rho absorbs mu0 and the delta-smoothing constant.
struct PointTarget {
  Vec2 x2 = Vec2::Zero();
  Vec2 v2 = Vec2::Zero();
  double rho = 1.0;
  Vec3 e_sc = Vec3::UnitZ();
};

struct DominantDipole {
  double rho = 0.0;
  Vec3 e = Vec3::Zero();
  bool degenerate = false;
};

/**
 * Largest-magnitude eigenpair of a symmetric dyad.
 *
 * Ties (equal magnitudes within 1e-10 relative) pick the eigenvector whose
 * absolute components are lexicographically largest and set `degenerate`.
 * The first nonzero component of `e` is made positive.
 */
inline DominantDipole dominant_dipole(const Dyad& dyad) {
  if ((dyad - dyad.transpose()).norm() > 1e-12 * std::max(1.0, dyad.norm())) {
    throw ConfigError("dominant_dipole: dyad is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (dyad + dyad.transpose());
  const auto eig = eigh_jacobi<double>(sym, 1e-15);

  const double scale = std::max(eig.values.cwiseAbs().maxCoeff(), 1e-300);
  double best_mag = -1.0;
  for (int i = 0; i < 3; ++i) best_mag = std::max(best_mag, std::abs(eig.values(i)));

  DominantDipole out;
  int chosen = -1;
  int ties = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(std::abs(eig.values(i)) - best_mag) > 1e-10 * scale) continue;
    ++ties;
    if (chosen < 0) {
      chosen = i;
      continue;
    }
    const Vec3 a = eig.vectors.col(i).cwiseAbs();
    const Vec3 b = eig.vectors.col(chosen).cwiseAbs();
    const std::array<double, 3> aa{a(0), a(1), a(2)};
    const std::array<double, 3> bb{b(0), b(1), b(2)};
    if (aa > bb) chosen = i;
  }
  out.rho = eig.values(chosen);
  out.e = eig.vectors.col(chosen).normalized();
  out.degenerate = ties > 1;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(out.e(i)) > 1e-12) {
      if (out.e(i) < 0.0) out.e = -out.e;
      break;
    }
  }
  return out;
}

/**
 * Scattering vector rho * <r_t, e_sc> * e_sc for a target at @p position.
 *
 * r_t is the transmit dipole projected transverse to the transmitter-to-target
 * look direction.
 */
inline Vec3 scatter_coupling(const Vec3& position, double rho, const Vec3& e_sc,
                             const AntennaPose& tx) {
  const Vec3 look = unit_toward(tx.position, position);
  const Vec3 r_t = transverse_project(tx.dipole, look);
  return rho * r_t.dot(e_sc) * e_sc;
}

inline Vec3 scatter_coupling(const PointTarget& target, const Topography& topo,
                             const AntennaPose& tx) {
  const auto s = lift_state(target.x2, target.v2, topo);
  return scatter_coupling(s.position, target.rho, target.e_sc, tx);
}

}  // namespace polglrt
