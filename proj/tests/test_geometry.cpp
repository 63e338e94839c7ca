#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tcube/geometry.hpp"

using namespace tcube;

TEST_CASE("quarter turn about z maps x to y") {
  const Quat q = Quat::from_axis_angle({0, 0, 1}, kPi / 2);
  const Vec3 r = q.rotate({1, 0, 0});
  CHECK(r.x == doctest::Approx(0.0));
  CHECK(r.y == doctest::Approx(1.0));
  CHECK(q.angle() == doctest::Approx(kPi / 2));
  CHECK(q.axis().z == doctest::Approx(1.0));
}

TEST_CASE("identity axis defaults to +z") {
  const Vec3 a = Quat::identity().axis();
  CHECK(a == Vec3{0, 0, 1});
  CHECK(Quat::identity().angle() == 0.0);
}

TEST_CASE("rotation preserves length and composes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    const Quat a = testing::random_rotation(rng), b = testing::random_rotation(rng);
    const Vec3 v{u(rng), u(rng), u(rng)};
    CHECK(a.rotate(v).norm() == doctest::Approx(v.norm()).epsilon(1e-12));
    const Vec3 lhs = (a * b).rotate(v), rhs = a.rotate(b.rotate(v));
    CHECK((lhs - rhs).norm() < 1e-12);
    const Vec3 back = a.conjugate().rotate(a.rotate(v));
    CHECK((back - v).norm() < 1e-12);
  }
}

TEST_CASE("basis columns are orthonormal and right handed") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Mat3 b = basis(testing::random_rotation(rng));
    for (int j = 0; j < 3; ++j) CHECK(b[j].norm() == doctest::Approx(1.0));
    CHECK(b[0].dot(b[1]) == doctest::Approx(0.0));
    CHECK((b[0].cross(b[1]) - b[2]).norm() < 1e-12);
  }
}

TEST_CASE("axis-angle round trip") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0.01, kPi - 0.01);
  for (int i = 0; i < 100; ++i) {
    const Quat r = testing::random_rotation(rng);
    const Vec3 axis = r.rotate({0, 0, 1});
    const double theta = ang(rng);
    const Quat q = Quat::from_axis_angle(axis, theta);
    CHECK(q.angle() == doctest::Approx(theta));
    CHECK((q.axis() - axis).norm() < 1e-9);
  }
}
