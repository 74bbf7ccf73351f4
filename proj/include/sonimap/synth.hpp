// sonimap - synthetic scenes: axis-aligned rooms with scripted obstacles,
// analytic ray-cast ground truth rasters, and depth frame rendering
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_SYNTH_HPP
#define SONIMAP_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sonimap/error.hpp"
#include "sonimap/geometry.hpp"
#include "sonimap/io/trajectory.hpp"
#include "sonimap/raster.hpp"

namespace sonimap::synth {

struct Box {
  Vec3 min{Vec3::Zero()};
  Vec3 max{Vec3::Zero()};

  bool contains(const Box& inner) const {
    return (inner.min.array() >= min.array()).all() &&
           (inner.max.array() <= max.array()).all();
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() &&
           (p.array() <= max.array()).all();
  }
};

struct MotionKey {
  int frame = 0;
  Vec3 center{Vec3::Zero()};
};

/// Axis-aligned box or vertical cylinder with an optional piecewise-linear
/// motion script over frame indices and a presence interval.
struct Obstacle {
  enum class Type { Box, Cylinder };

  Type type = Type::Box;
  Vec3 size{0.5, 0.5, 0.5};  // box extents
  double radius = 0.25;       // cylinder
  double height = 1.0;        // cylinder
  std::vector<MotionKey> keys{{0, Vec3::Zero()}};  // center positions
  int appear_frame = 0;
  int vanish_frame = std::numeric_limits<int>::max();

  bool active(int frame) const {
    return frame >= appear_frame && frame < vanish_frame;
  }

  Vec3 center_at(int frame) const {
    if (keys.size() == 1 || frame <= keys.front().frame)
      return keys.front().center;
    if (frame >= keys.back().frame) return keys.back().center;
    for (std::size_t i = 1; i < keys.size(); ++i) {
      if (frame <= keys[i].frame) {
        const auto& a = keys[i - 1];
        const auto& b = keys[i];
        const double u = b.frame == a.frame
                             ? 0.0
                             : static_cast<double>(frame - a.frame) /
                                   (b.frame - a.frame);
        return a.center + u * (b.center - a.center);
      }
    }
    return keys.back().center;
  }

  Box bounds_at(int frame) const {
    const Vec3 c = center_at(frame);
    if (type == Type::Box) return Box{c - size / 2, c + size / 2};
    const Vec3 r(radius, radius, height / 2);
    return Box{c - r, c + r};
  }
};

struct CameraModel {
  double hfov_deg = 90.0;
  double vfov_deg = 70.0;
  int cols = 160;
  int rows = 120;
  double max_depth = 10.0;

  void validate() const {
    if (hfov_deg <= 0 || hfov_deg >= 180 || vfov_deg <= 0 || vfov_deg >= 180)
      throw Error("CameraModel: FOVs must lie in (0, 180)");
    if (cols < 2 || rows < 2) throw Error("CameraModel: need >= 2x2 rays");
    if (max_depth <= 0) throw Error("CameraModel: max_depth must be positive");
  }
};

/// In-place pan (poses rotate about a fixed point) or explicit waypoints.
struct TrajectorySpec {
  enum class Type { Pan, Waypoints };

  Type type = Type::Pan;
  Vec3 center{Vec3::Zero()};
  int frames = 36;
  double start_deg = 0.0;
  double sweep_deg = 360.0;
  double dt = 0.1;
  std::vector<io::TrajectoryRecord> waypoints;
};

/// World-from-camera pose for a level camera whose +Z optical axis points
/// along the given heading yaw (+X right, +Y down, depth convention).
inline Pose make_level_camera_pose(const Vec3& position, double yaw_deg) {
  const double psi = deg2rad(yaw_deg);
  Eigen::Matrix3d R;
  // columns: camera x (right), y (down), z (forward) in world coordinates
  R << std::sin(psi), 0.0, std::cos(psi),
      -std::cos(psi), 0.0, std::sin(psi),
      0.0, -1.0, 0.0;
  return Pose(position, Quat(R));
}

struct Scene {
  Box room;
  std::vector<Obstacle> obstacles;
  TrajectorySpec trajectory;
  CameraModel camera;

  void validate() const {
    if ((room.max.array() <= room.min.array()).any())
      throw Error("Scene: room box is empty");
    camera.validate();
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      const auto& ob = obstacles[i];
      if (ob.keys.empty())
        throw Error("Scene: obstacle " + std::to_string(i) + " has no keys");
      // Linear motion between keyframes and a convex room: checking the
      // keyframes covers all scripted times.
      for (const auto& key : ob.keys) {
        Obstacle probe = ob;
        probe.keys = {key};
        if (!room.contains(probe.bounds_at(key.frame)))
          throw Error("Scene: obstacle " + std::to_string(i) +
                      " leaves the room at frame " +
                      std::to_string(key.frame));
      }
    }
  }

  std::vector<io::TrajectoryRecord> poses() const {
    if (trajectory.type == TrajectorySpec::Type::Waypoints)
      return trajectory.waypoints;
    std::vector<io::TrajectoryRecord> out;
    out.reserve(trajectory.frames);
    for (int k = 0; k < trajectory.frames; ++k) {
      const double yaw = trajectory.start_deg +
                         trajectory.sweep_deg * k / trajectory.frames;
      io::TrajectoryRecord rec;
      rec.timestamp = k * trajectory.dt;
      rec.pose = make_level_camera_pose(trajectory.center, yaw);
      out.push_back(rec);
    }
    return out;
  }

  static Scene load(const std::string& path);
  static Scene from_json(const nlohmann::json& doc, const std::string& path);
};

// --- ray intersections ---------------------------------------------------

namespace detail {

/// Nearest positive hit of a ray with a box seen from outside (entry face)
/// or inside (exit face, i.e. the interior wall surface).
inline std::optional<double> ray_box(const Vec3& origin, const Vec3& dir,
                                     const Box& box, bool from_inside) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[a] - origin[a]) / dir[a];
    double t1 = (box.max[a] - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far) return std::nullopt;
  if (from_inside) {
    if (t_far <= 0) return std::nullopt;
    return t_far;
  }
  if (t_near <= 0) return std::nullopt;
  return t_near;
}

/// Nearest positive hit with a finite vertical cylinder (side plus caps).
inline std::optional<double> ray_cylinder(const Vec3& origin, const Vec3& dir,
                                          const Vec3& center, double radius,
                                          double z_lo, double z_hi) {
  std::optional<double> best;
  auto consider = [&](double t) {
    if (t > 1e-12 && (!best || t < *best)) best = t;
  };

  const double ox = origin.x() - center.x();
  const double oy = origin.y() - center.y();
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  if (a > 1e-15) {
    const double b = 2.0 * (ox * dir.x() + oy * dir.y());
    const double c = ox * ox + oy * oy - radius * radius;
    const double disc = b * b - 4 * a * c;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
        const double z = origin.z() + t * dir.z();
        if (z >= z_lo && z <= z_hi) consider(t);
      }
    }
  }
  if (std::abs(dir.z()) > 1e-15) {
    for (double zc : {z_lo, z_hi}) {
      const double t = (zc - origin.z()) / dir.z();
      const double x = ox + t * dir.x();
      const double y = oy + t * dir.y();
      if (x * x + y * y <= radius * radius) consider(t);
    }
  }
  return best;
}

}  // namespace detail

/// Nearest surface distance along a 3D ray through the scene at a frame:
/// the room interior plus the active obstacles.
inline std::optional<double> cast_ray(const Scene& scene, const Vec3& origin,
                                      const Vec3& dir, int frame) {
  std::optional<double> best =
      detail::ray_box(origin, dir, scene.room, /*from_inside=*/true);
  for (const auto& ob : scene.obstacles) {
    if (!ob.active(frame)) continue;
    std::optional<double> t;
    if (ob.type == Obstacle::Type::Box) {
      t = detail::ray_box(origin, dir, ob.bounds_at(frame), false);
    } else {
      const Vec3 c = ob.center_at(frame);
      t = detail::ray_cylinder(origin, dir, c, ob.radius,
                               c.z() - ob.height / 2, c.z() + ob.height / 2);
    }
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

/// Planar variant used by the raster ground truth: a horizontal ray kept to
/// surfaces whose vertical extent meets the height band [band_lo, band_hi]
/// (absolute z). The circle passes `exclusive_bottom` to mirror the
/// strictly-above-ground rule of segment_ground; the cylinder row-center
/// rule is inclusive at both ends.
inline std::optional<double> cast_planar_ray(const Scene& scene,
                                             const Vec2& origin_xy,
                                             const Vec2& dir_xy,
                                             double band_lo, double band_hi,
                                             int frame,
                                             bool exclusive_bottom = false) {
  const Vec3 origin(origin_xy.x(), origin_xy.y(), 0.0);
  const Vec3 dir(dir_xy.x(), dir_xy.y(), 0.0);

  // Room walls extend over the full height span, so a 2D slab hit suffices
  // as long as the band overlaps the room at all.
  std::optional<double> best;
  if (band_hi >= scene.room.min.z() && band_lo <= scene.room.max.z())
    best = detail::ray_box(origin, dir, Box{
        Vec3(scene.room.min.x(), scene.room.min.y(), -1.0),
        Vec3(scene.room.max.x(), scene.room.max.y(), 1.0)}, true);

  for (const auto& ob : scene.obstacles) {
    if (!ob.active(frame)) continue;
    const Box b = ob.bounds_at(frame);
    const bool above = b.min.z() > band_hi;
    const bool below =
        exclusive_bottom ? b.max.z() <= band_lo : b.max.z() < band_lo;
    if (above || below) continue;  // outside band
    std::optional<double> t;
    if (ob.type == Obstacle::Type::Box) {
      t = detail::ray_box(origin, dir,
                          Box{Vec3(b.min.x(), b.min.y(), -1.0),
                              Vec3(b.max.x(), b.max.y(), 1.0)},
                          false);
    } else {
      const Vec3 c = ob.center_at(frame);
      t = detail::ray_cylinder(origin, dir, Vec3(c.x(), c.y(), 0.0),
                               ob.radius, -1.0, 1.0);
    }
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

/// Ground-truth circle: for every bin-center direction, the exact nearest
/// intersection restricted to the human height band above the floor.
inline CircularRaster analytic_circle(const Scene& scene, const Pose& pose,
                                      const RasterParams& params,
                                      int frame = 0,
                                      OpticalAxis axis = OpticalAxis::PlusZ) {
  params.validate();
  if (!scene.room.contains(pose.t))
    throw Error("analytic_circle: pose outside the room");
  CircularRaster raster;
  raster.center = pose.t;
  raster.heading = sensor_heading_2d(pose, axis);
  const double floor_z = pose.t.z() - params.sensor_height;
  const double band_lo = floor_z + params.ground_band;
  const double band_hi = floor_z + params.height_cap;
  const Vec2 c(pose.t.x(), pose.t.y());
  const double heading_bearing = bearing_deg(raster.heading);
  for (int b = 0; b < CircularRaster::kBins; ++b) {
    const double theta = deg2rad(heading_bearing + b + 0.5);
    const Vec2 dir(std::cos(theta), std::sin(theta));
    const auto t = cast_planar_ray(scene, c, dir, band_lo, band_hi, frame,
                                   /*exclusive_bottom=*/true);
    if (t && *t <= params.r_max) raster.update_min(b, *t);
  }
  return raster;
}

/// Ground-truth cylinder: per (azimuth, elevation row) a horizontal ray at
/// the row-center height; an obstacle counts when the row center lies within
/// its vertical extent, a wall when the height is inside the room.
inline CylindricalRaster analytic_cylinder(
    const Scene& scene, const Pose& pose, const RasterParams& params,
    int frame = 0, OpticalAxis axis = OpticalAxis::PlusZ) {
  params.validate();
  if (!scene.room.contains(pose.t))
    throw Error("analytic_cylinder: pose outside the room");
  CylindricalRaster raster(params);
  raster.center = pose.t;
  raster.heading = sensor_heading_2d(pose, axis);
  const double ref_z = params.cylinder_band_from_ground
                           ? pose.t.z() - params.sensor_height
                           : pose.t.z();
  const Vec2 c(pose.t.x(), pose.t.y());
  const double heading_bearing = bearing_deg(raster.heading);
  for (int col = 0; col < CylindricalRaster::kColumns; ++col) {
    const double theta = deg2rad(heading_bearing + col + 0.5);
    const Vec2 dir(std::cos(theta), std::sin(theta));
    for (int row = 0; row < raster.rows; ++row) {
      const double z = ref_z + raster.row_center_elevation(row);
      if (z < scene.room.min.z() || z > scene.room.max.z()) continue;
      const auto t =
          cast_planar_ray(scene, c, dir, z, z, frame);
      if (t && *t <= params.r_max) raster.update_min(col, row, *t);
    }
  }
  return raster;
}

/// Renders one depth frame: one ray per pixel through the FOV grid, nearest
/// intersection, back-projected into the sensor frame. Optional Gaussian
/// range noise. Misses and hits beyond max_depth are omitted.
inline PointCloud render_depth_frame(const Scene& scene, const Pose& pose,
                                     const CameraModel& camera, int frame,
                                     double noise_sigma = 0.0,
                                     std::mt19937_64* rng = nullptr) {
  camera.validate();
  PointCloud cloud;
  cloud.frame = Frame::Sensor;
  cloud.points.reserve(static_cast<std::size_t>(camera.cols) * camera.rows);
  const Eigen::Matrix3d R = pose.q.toRotationMatrix();
  std::normal_distribution<double> noise(0.0, noise_sigma);

  for (int r = 0; r < camera.rows; ++r) {
    const double ay = deg2rad((static_cast<double>(r) / (camera.rows - 1) - 0.5) *
                              camera.vfov_deg);
    for (int col = 0; col < camera.cols; ++col) {
      const double ax = deg2rad(
          (static_cast<double>(col) / (camera.cols - 1) - 0.5) *
          camera.hfov_deg);
      // camera frame: +X right, +Y down, +Z forward
      Vec3 d_cam(std::tan(ax), std::tan(ay), 1.0);
      d_cam.normalize();
      const Vec3 d_world = R * d_cam;
      const auto t = cast_ray(scene, pose.t, d_world, frame);
      if (!t) continue;
      double range = *t;
      if (noise_sigma > 0.0 && rng) range += noise(*rng);
      if (range <= 0.0 || range > camera.max_depth) continue;
      cloud.points.push_back(d_cam * range);
    }
  }
  return cloud;
}

// --- scene JSON ------------------------------------------------------------

inline Scene Scene::from_json(const nlohmann::json& doc,
                              const std::string& path) {
  try {
    Scene scene;
    const auto& room = doc.at("room");
    const auto rmin = room.value("min", std::vector<double>{0, 0, 0});
    const auto rsize = room.at("size").get<std::vector<double>>();
    if (rmin.size() != 3 || rsize.size() != 3)
      throw ParseError(path, 0, "room min/size must have 3 components");
    scene.room.min = Vec3(rmin[0], rmin[1], rmin[2]);
    scene.room.max = scene.room.min + Vec3(rsize[0], rsize[1], rsize[2]);

    for (const auto& jo : doc.value("obstacles", nlohmann::json::array())) {
      Obstacle ob;
      const std::string type = jo.value("type", "box");
      if (type == "box") {
        ob.type = Obstacle::Type::Box;
        const auto size = jo.at("size").get<std::vector<double>>();
        if (size.size() != 3)
          throw ParseError(path, 0, "obstacle size must have 3 components");
        ob.size = Vec3(size[0], size[1], size[2]);
      } else if (type == "cylinder") {
        ob.type = Obstacle::Type::Cylinder;
        ob.radius = jo.at("radius").get<double>();
        ob.height = jo.at("height").get<double>();
      } else {
        throw ParseError(path, 0, "unknown obstacle type '" + type + "'");
      }
      ob.keys.clear();
      if (jo.contains("keyframes")) {
        for (const auto& jk : jo.at("keyframes")) {
          const auto c = jk.at("center").get<std::vector<double>>();
          if (c.size() != 3)
            throw ParseError(path, 0, "keyframe center must have 3 components");
          ob.keys.push_back({jk.at("frame").get<int>(), Vec3(c[0], c[1], c[2])});
        }
        if (ob.keys.empty())
          throw ParseError(path, 0, "obstacle keyframes empty");
      } else {
        const auto c = jo.at("center").get<std::vector<double>>();
        if (c.size() != 3)
          throw ParseError(path, 0, "obstacle center must have 3 components");
        ob.keys.push_back({0, Vec3(c[0], c[1], c[2])});
      }
      ob.appear_frame = jo.value("appear_frame", 0);
      ob.vanish_frame =
          jo.value("vanish_frame", std::numeric_limits<int>::max());
      scene.obstacles.push_back(ob);
    }

    if (doc.contains("trajectory")) {
      const auto& jt = doc.at("trajectory");
      const std::string type = jt.value("type", "pan");
      if (type == "pan") {
        scene.trajectory.type = TrajectorySpec::Type::Pan;
        const auto c = jt.at("center").get<std::vector<double>>();
        if (c.size() != 3)
          throw ParseError(path, 0, "trajectory center must have 3 components");
        scene.trajectory.center = Vec3(c[0], c[1], c[2]);
        scene.trajectory.frames = jt.at("frames").get<int>();
        scene.trajectory.start_deg = jt.value("start_deg", 0.0);
        scene.trajectory.sweep_deg = jt.value("sweep_deg", 360.0);
        scene.trajectory.dt = jt.value("dt", 0.1);
        if (scene.trajectory.frames <= 0)
          throw ParseError(path, 0, "trajectory frames must be positive");
      } else if (type == "waypoints") {
        scene.trajectory.type = TrajectorySpec::Type::Waypoints;
        for (const auto& jw : jt.at("poses")) {
          const auto v = jw.get<std::vector<double>>();
          if (v.size() != 8)
            throw ParseError(path, 0,
                             "waypoint needs 8 values (t tx ty tz qx qy qz qw)");
          io::TrajectoryRecord rec;
          rec.timestamp = v[0];
          rec.pose = Pose(Vec3(v[1], v[2], v[3]), Quat(v[7], v[4], v[5], v[6]));
          scene.trajectory.waypoints.push_back(rec);
        }
        if (scene.trajectory.waypoints.empty())
          throw ParseError(path, 0, "waypoint list empty");
      } else {
        throw ParseError(path, 0, "unknown trajectory type '" + type + "'");
      }
    }

    if (doc.contains("camera")) {
      const auto& jc = doc.at("camera");
      scene.camera.hfov_deg = jc.value("hfov_deg", scene.camera.hfov_deg);
      scene.camera.vfov_deg = jc.value("vfov_deg", scene.camera.vfov_deg);
      scene.camera.cols = jc.value("cols", scene.camera.cols);
      scene.camera.rows = jc.value("rows", scene.camera.rows);
      scene.camera.max_depth = jc.value("max_depth", scene.camera.max_depth);
    }

    scene.validate();
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, std::string("malformed scene: ") + e.what());
  }
}

inline Scene Scene::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  return from_json(doc, path);
}

}  // namespace sonimap::synth

#endif  // SONIMAP_SYNTH_HPP
