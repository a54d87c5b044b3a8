#include "sthrn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sthrn/errors.hpp"

namespace sthrn::geometry {

namespace {

void require_unit(const Vec3& v, const char* name) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kUnitTolerance) {
    throw ValidationError(std::string(name) + " is not a unit vector");
  }
}

}  // namespace

Eigen::Matrix3d hat(const Vec3& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

AxisAngle axis_angle_between(const Vec3& from, const Vec3& to) {
  require_unit(from, "from");
  require_unit(to, "to");
  const double dot = std::clamp(from.dot(to), -1.0, 1.0);
  if (dot < -1.0 + kAntipodalMargin) {
    throw AntipodalInput("bone directions are antipodal; rotation axis undefined");
  }
  const Vec3 cross = from.cross(to);
  const double sin_angle = cross.norm();
  if (sin_angle == 0.0) {
    return AxisAngle{};
  }
  return AxisAngle{cross / sin_angle, std::atan2(sin_angle, dot)};
}

AxisAngle axis_angle_between_resolved(const Vec3& from, const Vec3& to) {
  try {
    return axis_angle_between(from, to);
  } catch (const AntipodalInput&) {
    Vec3 axis = from.cross(Vec3::UnitX());
    if (axis.norm() < 1e-6) {
      axis = from.cross(Vec3::UnitY());
    }
    return AxisAngle{axis.normalized(), std::numbers::pi};
  }
}

Rotation3 rodrigues(const AxisAngle& aa) {
  const Eigen::Matrix3d n = hat(aa.axis);
  return Rotation3::Identity() + std::sin(aa.angle) * n + (1.0 - std::cos(aa.angle)) * (n * n);
}

So3Vec log_map(const Rotation3& r) {
  const Vec3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double cos_angle = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double angle = std::atan2(0.5 * v.norm(), cos_angle);
  if (angle < kSmallAngle) {
    return So3Vec::Zero();
  }
  if (angle > std::numbers::pi - kNearPiMargin) {
    // The symmetric part is (1 - cos) n n^T; its largest diagonal column is
    // the best conditioned multiple of n.
    const Eigen::Matrix3d sym = 0.5 * (r + r.transpose()) - cos_angle * Eigen::Matrix3d::Identity();
    Eigen::Index k = 0;
    sym.diagonal().maxCoeff(&k);
    Vec3 axis = sym.col(k).normalized();
    if (axis.dot(v) < 0.0) {
      axis = -axis;
    }
    return angle * axis;
  }
  return (angle / (2.0 * std::sin(angle))) * v;
}

Rotation3 exp_map(const So3Vec& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    return Rotation3::Identity();
  }
  return rodrigues(AxisAngle{w / angle, angle});
}

So3Vec wrap_so3(const So3Vec& w) {
  const double angle = w.norm();
  if (angle <= std::numbers::pi) {
    return w;
  }
  double wrapped = std::fmod(angle, 2.0 * std::numbers::pi);
  if (wrapped > std::numbers::pi) {
    wrapped -= 2.0 * std::numbers::pi;
  }
  return w * (wrapped / angle);
}

}  // namespace sthrn::geometry
