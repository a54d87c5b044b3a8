#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sthrn {

using Vec3 = Eigen::Vector3d;
using Rotation3 = Eigen::Matrix3d;
/// Scaled rotation axis theta * n, an element of so(3).
using So3Vec = Eigen::Vector3d;

struct AxisAngle {
  Vec3 axis = Vec3::UnitX();
  double angle = 0.0;  // radians in [0, pi]
};

namespace geometry {

inline constexpr double kUnitTolerance = 1e-9;
/// Below this angle the log map returns the zero vector.
inline constexpr double kSmallAngle = 1e-7;
/// Above pi minus this margin the log map reads the axis from the symmetric part.
inline constexpr double kNearPiMargin = 1e-5;
/// Dot products below -1 + this are treated as antipodal.
inline constexpr double kAntipodalMargin = 1e-8;

/// Skew-symmetric matrix v^ such that v^ * u = v x u.
Eigen::Matrix3d hat(const Vec3& v);

/// Minimal rotation taking `from` onto `to`, as an axis-angle pair.
/// Throws AntipodalInput when the directions are (nearly) opposite.
AxisAngle axis_angle_between(const Vec3& from, const Vec3& to);

/// Same as axis_angle_between but resolves antipodal pairs with a
/// deterministic axis orthogonal to `from`.
AxisAngle axis_angle_between_resolved(const Vec3& from, const Vec3& to);

/// R = I + sin(t) n^ + (1 - cos(t)) n^^2.
Rotation3 rodrigues(const AxisAngle& aa);

/// Logarithm map SO(3) -> so(3); the output norm lies in [0, pi].
So3Vec log_map(const Rotation3& r);

/// Exponential map so(3) -> SO(3). Any norm is accepted.
Rotation3 exp_map(const So3Vec& w);

/// Re-expresses w with norm in [0, pi] without changing exp_map(w).
So3Vec wrap_so3(const So3Vec& w);

}  // namespace geometry
}  // namespace sthrn
