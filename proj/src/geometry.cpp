#include "tcube/geometry.hpp"

#include <algorithm>

namespace tcube {

Quat Quat::from_axis_angle(const Vec3& axis, double radians) {
  const double n = axis.norm();
  if (n == 0.0) return identity();
  const double s = std::sin(radians / 2.0) / n;
  return {std::cos(radians / 2.0), axis.x * s, axis.y * s, axis.z * s};
}

Quat Quat::normalized() const {
  const double n = norm();
  return {w / n, x / n, y / n, z / n};
}

Quat Quat::operator*(const Quat& o) const {
  return {w * o.w - x * o.x - y * o.y - z * o.z,
          w * o.x + x * o.w + y * o.z - z * o.y,
          w * o.y - x * o.z + y * o.w + z * o.x,
          w * o.z + x * o.y - y * o.x + z * o.w};
}

Vec3 Quat::rotate(const Vec3& v) const {
  const Vec3 u{x, y, z};
  const Vec3 t = u.cross(v) * 2.0;
  return v + t * w + u.cross(t);
}

double Quat::angle() const {
  const double c = std::clamp(std::abs(w) / norm(), 0.0, 1.0);
  return 2.0 * std::acos(c);
}

Vec3 Quat::axis() const {
  Vec3 v{x, y, z};
  if (w < 0.0) v = -v;
  const double n = v.norm();
  if (n < 1e-12) return {0.0, 0.0, 1.0};
  return v / n;
}

Mat3 basis(const Quat& q) {
  return {q.rotate({1, 0, 0}), q.rotate({0, 1, 0}), q.rotate({0, 0, 1})};
}

}  // namespace tcube
