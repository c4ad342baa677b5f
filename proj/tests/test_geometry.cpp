#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace polglrt;
using Catch::Matchers::WithinAbs;

TEST_CASE("unit_toward examples") {
  CHECK((unit_toward(Vec3(0, 0, 0), Vec3(2, 0, 0)) - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((unit_toward(Vec3(0, 0, 0), Vec3(3, 4, 0)) - Vec3(0.6, 0.8, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(unit_toward(Vec3(1, 1, 1), Vec3(1, 1, 1)), GeometryError);
}

TEST_CASE("transverse_project examples") {
  const Vec3 x(1, 0, 0);
  CHECK((transverse_project(Vec3(0, 0, 1), x) - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK(transverse_project(x, x).norm() < 1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK((transverse_project(Vec3(r, 0, r), x) - Vec3(0, 0, r)).norm() < 1e-15);
}

TEST_CASE("transverse_project properties on random inputs") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 e(nd(gen), nd(gen), nd(gen));
    const Vec3 g = testing::random_unit(gen);
    const Vec3 p = transverse_project(e, g);
    CHECK((transverse_project(p, g) - p).norm() < 1e-12 * (1 + e.norm()));
    CHECK(std::abs(p.dot(g)) < 1e-12 * (1 + e.norm()));
    CHECK(p.norm() <= e.norm() + 1e-12);
    const Vec3 cross_form = -g.cross(g.cross(e));
    CHECK((cross_form - p).norm() < 1e-12 * (1 + e.norm()));
  }
}

TEST_CASE("lift_state examples") {
  auto s = lift_state(Vec2(100, -50), Vec2(10, 0), Topography::flat(0));
  CHECK(s.position == Vec3(100, -50, 0));
  CHECK(s.velocity == Vec3(10, 0, 0));

  s = lift_state(Vec2(0, 0), Vec2(0, 0), Topography::flat(5));
  CHECK(s.position == Vec3(0, 0, 5));
  CHECK(s.velocity == Vec3(0, 0, 0));

  s = lift_state(Vec2(1, 2), Vec2(3, 4), Topography::plane(0.0, Vec2(0.1, 0.0)));
  CHECK_THAT(s.position.z(), WithinAbs(0.1, 1e-15));
  CHECK_THAT(s.velocity.z(), WithinAbs(0.3, 1e-15));
  CHECK(s.position.head<2>() == Vec2(1, 2));
}
