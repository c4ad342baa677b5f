#pragma once

// Scene geometry: look directions, transverse (dipole) projections and the
// lifting of ground-plane states onto the known topography.

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "polglrt/errors.hpp"

namespace polglrt {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 2.99792458e8;

/**
 * @brief Unit vector pointing from @p from to @p to.
 * @throws GeometryError if the two points coincide.
 */
inline Vec3 unit_toward(const Vec3& from, const Vec3& to) {
  const Vec3 d = to - from;
  const double n = d.norm();
  const double scale = 1.0 + from.norm() + to.norm();
  if (!(n > 1e-12 * scale)) {
    throw GeometryError("unit_toward: coincident points");
  }
  return d / n;
}

/**
 * @brief Component of @p e orthogonal to the unit vector @p look.
 *
 * Equal to -look x (look x e); the algebraic form e - (e.look) look is used
 * since it needs no cross products.
 */
inline Vec3 transverse_project(const Vec3& e, const Vec3& look) {
  return e - e.dot(look) * look;
}

/**
 * @brief Ground height model psi(x1, x2) with gradient.
 *
 * Planes only: psi(x) = height + gradient . x. A flat ground is the
 * zero-gradient case.
 */
class Topography {
 public:
  Topography() = default;

  static Topography flat(double height) { return Topography(height, Vec2::Zero()); }
  static Topography plane(double height, const Vec2& gradient) {
    return Topography(height, gradient);
  }

  double height(const Vec2& x) const { return height_ + gradient_.dot(x); }
  Vec2 gradient(const Vec2& /*x*/) const { return gradient_; }

  bool is_flat() const { return gradient_.isZero(0.0); }
  double base_height() const { return height_; }
  const Vec2& base_gradient() const { return gradient_; }

 private:
  Topography(double h, const Vec2& g) : height_(h), gradient_(g) {}

  double height_ = 0.0;
  Vec2 gradient_ = Vec2::Zero();
};

struct State3 {
  Vec3 position;
  Vec3 velocity;
};

/// Lift a ground position/velocity to 3D: x = (x2, psi(x2)), v = (v2, grad psi . v2).
inline State3 lift_state(const Vec2& x2, const Vec2& v2, const Topography& topo) {
  State3 s;
  s.position = Vec3(x2.x(), x2.y(), topo.height(x2));
  s.velocity = Vec3(v2.x(), v2.y(), topo.gradient(x2).dot(v2));
  return s;
}

}  // namespace polglrt
