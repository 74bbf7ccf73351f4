// sonimap - rigid-body poses, point clouds, and polar conversions
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_GEOMETRY_HPP
#define SONIMAP_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>
#include <vector>

#include "sonimap/error.hpp"

namespace sonimap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Normalizes an angle in degrees into [0, 360).
inline double wrap_deg_360(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a = 0.0;  // fmod can return -0.0 or land on 360 exactly
  return a;
}

/// Wraps an angle difference into (-180, 180].
inline double wrap_deg_180(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

/// Which sensor-frame axis points "forward" (the optical axis). Depth
/// cameras use +Z; some robot conventions use +X.
enum class OpticalAxis { PlusZ, PlusX };

/// Rigid transform of the sensor in the world frame. The quaternion rotates
/// sensor-frame vectors into the world frame and is kept unit-norm.
struct Pose {
  Vec3 t{Vec3::Zero()};
  Quat q{Quat::Identity()};

  Pose() = default;
  Pose(const Vec3& translation, const Quat& rotation)
      : t(translation), q(rotation) {
    if (q.norm() < 1e-12) throw Error("Pose: zero-norm quaternion");
    q.normalize();
  }

  static Pose identity() { return Pose(); }

  Vec3 apply(const Vec3& p) const { return q * p + t; }

  Pose inverse() const {
    Quat qi = q.conjugate();
    return Pose(qi * (-t), qi);
  }

  Pose compose(const Pose& rhs) const {
    return Pose(q * rhs.t + t, q * rhs.q);
  }

  bool finite() const {
    return t.allFinite() && std::isfinite(q.w()) && std::isfinite(q.x()) &&
           std::isfinite(q.y()) && std::isfinite(q.z());
  }
};

enum class Frame { Sensor, World };

/// A set of 3D points in meters with a frame tag so a cloud cannot be
/// transformed to world twice by accident.
struct PointCloud {
  std::vector<Vec3> points;
  Frame frame = Frame::Sensor;
};

/// Azimuth/range/elevation triple used by the polar rasters.
struct PolarCoord {
  double azimuth_deg = 0.0;  // [0, 360)
  double range_m = 0.0;      // >= 0
  double elevation_m = 0.0;  // signed height relative to the sensor
};

/// Applies the pose to every point of a sensor-frame cloud.
/// Throws if the cloud is already tagged world (double-transform guard).
inline PointCloud transform_to_world(const Pose& pose, const PointCloud& cloud) {
  if (cloud.frame == Frame::World)
    throw Error("transform_to_world: cloud is already in the world frame");
  if (!pose.finite()) throw Error("transform_to_world: non-finite pose");
  PointCloud out;
  out.frame = Frame::World;
  out.points.reserve(cloud.points.size());
  const Eigen::Matrix3d R = pose.q.toRotationMatrix();
  for (const Vec3& p : cloud.points) out.points.push_back(R * p + pose.t);
  return out;
}

/// Sensor optical axis projected onto the world XY plane, normalized.
/// Defines azimuth 0 for the sensor-centric rasters. Throws
/// HeadingDegenerateError when the axis is within ~1e-6 of vertical.
inline Vec2 sensor_heading_2d(const Pose& pose,
                              OpticalAxis axis = OpticalAxis::PlusZ) {
  const Vec3 forward =
      axis == OpticalAxis::PlusZ ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  const Vec3 world = pose.q * forward;
  const Vec2 planar(world.x(), world.y());
  const double n = planar.norm();
  if (n <= 1e-6)
    throw HeadingDegenerateError(
        "sensor_heading_2d: optical axis is near-vertical");
  return planar / n;
}

/// Signed angle from `heading` to `to_point`, counter-clockwise positive
/// viewed from +Z, mapped into [0, 360). Throws on a near-zero target vector.
inline double signed_azimuth_deg(const Vec2& heading, const Vec2& to_point) {
  if (to_point.norm() <= 1e-9)
    throw Error("signed_azimuth_deg: zero-length target vector");
  const double cross = heading.x() * to_point.y() - heading.y() * to_point.x();
  const double dot = heading.dot(to_point);
  return wrap_deg_360(rad2deg(std::atan2(cross, dot)));
}

/// Rotates a planar vector counter-clockwise by the given angle.
inline Vec2 rotate_2d(const Vec2& v, double deg) {
  const double r = deg2rad(deg);
  const double c = std::cos(r), s = std::sin(r);
  return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

/// World bearing (degrees in [0,360), measured from world +X, CCW) of a
/// planar vector.
inline double bearing_deg(const Vec2& v) {
  return signed_azimuth_deg(Vec2(1.0, 0.0), v);
}

}  // namespace sonimap

#endif  // SONIMAP_GEOMETRY_HPP
