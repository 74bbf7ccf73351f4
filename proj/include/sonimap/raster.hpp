// sonimap - sensor-centric circular and cylindrical min-range rasters
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_RASTER_HPP
#define SONIMAP_RASTER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sonimap/error.hpp"
#include "sonimap/geometry.hpp"
#include "sonimap/voxel_map.hpp"

namespace sonimap {

struct RasterParams {
  double r_max = 10.0;
  double ground_band = 0.1;   // points within this height of the floor drop
  double height_cap = 2.0;    // top of the human band above the floor
  double sensor_height = 1.2; // sensor height above the floor
  double elev_min = 0.1;      // cylinder band, relative to the sensor
  double elev_max = 2.0;
  int elevation_rows = 19;
  // When true the cylinder band is measured from the floor instead of the
  // sensor (the two readings of the paper's height band).
  bool cylinder_band_from_ground = false;

  double row_height() const {
    return (elev_max - elev_min) / elevation_rows;
  }

  void validate() const {
    if (r_max <= 0.0) throw Error("RasterParams: r_max must be positive");
    if (ground_band < 0.0 || ground_band >= height_cap)
      throw Error("RasterParams: need 0 <= ground_band < height_cap");
    if (elevation_rows <= 0 || elev_max <= elev_min)
      throw Error("RasterParams: bad elevation band");
  }
};

/// 360 one-degree bins around the sensor. Bin b covers azimuth [b, b+1)
/// measured counter-clockwise from the heading; a known bin stores the
/// minimum planar range of the points that fell into it.
struct CircularRaster {
  static constexpr int kBins = 360;

  Vec3 center{Vec3::Zero()};
  Vec2 heading{1.0, 0.0};
  std::vector<double> range = std::vector<double>(kBins, 0.0);
  std::vector<std::uint8_t> known = std::vector<std::uint8_t>(kBins, 0);

  bool is_known(int bin) const { return known[bin] != 0; }

  void update_min(int bin, double r) {
    if (!known[bin] || r < range[bin]) {
      range[bin] = r;
      known[bin] = 1;
    }
  }

  std::size_t known_count() const {
    std::size_t n = 0;
    for (auto k : known) n += k;
    return n;
  }
};

/// 360 azimuth columns x `rows` elevation rows covering [elev_min, elev_max]
/// relative to the sensor; cells store minimum planar radial range.
struct CylindricalRaster {
  static constexpr int kColumns = 360;

  Vec3 center{Vec3::Zero()};
  Vec2 heading{1.0, 0.0};
  int rows = 19;
  double elev_min = 0.1;
  double row_height = 0.1;
  std::vector<double> range;
  std::vector<std::uint8_t> known;

  CylindricalRaster() { resize(); }
  explicit CylindricalRaster(const RasterParams& params)
      : rows(params.elevation_rows),
        elev_min(params.elev_min),
        row_height(params.row_height()) {
    resize();
  }

  void resize() {
    range.assign(static_cast<std::size_t>(kColumns) * rows, 0.0);
    known.assign(static_cast<std::size_t>(kColumns) * rows, 0);
  }

  std::size_t idx(int col, int row) const {
    return static_cast<std::size_t>(col) * rows + row;
  }

  bool is_known(int col, int row) const { return known[idx(col, row)] != 0; }

  double row_center_elevation(int row) const {
    return elev_min + (row + 0.5) * row_height;
  }

  void update_min(int col, int row, double r) {
    const std::size_t i = idx(col, row);
    if (!known[i] || r < range[i]) {
      range[i] = r;
      known[i] = 1;
    }
  }

  std::size_t known_count() const {
    std::size_t n = 0;
    for (auto k : known) n += k;
    return n;
  }
};

/// Keeps points in the human band: height above the floor in
/// (ground_band, height_cap], with floor_z = sensor_z - sensor_height.
inline SurfaceSet segment_ground(const SurfaceSet& points, double sensor_z,
                                 const RasterParams& params) {
  const double floor_z = sensor_z - params.sensor_height;
  SurfaceSet out;
  out.points.reserve(points.points.size());
  for (const Vec3& p : points.points) {
    const double h = p.z() - floor_z;
    if (h > params.ground_band && h <= params.height_cap)
      out.points.push_back(p);
  }
  return out;
}

namespace detail {

inline int azimuth_bin(const Vec2& heading, const Vec2& v) {
  const int bin = static_cast<int>(signed_azimuth_deg(heading, v));
  return std::clamp(bin, 0, CircularRaster::kBins - 1);
}

}  // namespace detail

/// Projects points onto the XY plane and keeps the closest planar range per
/// one-degree bin. Input is expected to be ground-segmented already.
inline CircularRaster rasterize_circle(const SurfaceSet& surface,
                                       const Pose& pose,
                                       const RasterParams& params,
                                       OpticalAxis axis = OpticalAxis::PlusZ) {
  params.validate();
  CircularRaster raster;
  raster.center = pose.t;
  raster.heading = sensor_heading_2d(pose, axis);
  const Vec2 c(pose.t.x(), pose.t.y());
  for (const Vec3& p : surface.points) {
    const Vec2 v(p.x() - c.x(), p.y() - c.y());
    const double r = v.norm();
    if (r > params.r_max || r < 1e-6) continue;
    raster.update_min(detail::azimuth_bin(raster.heading, v), r);
  }
  return raster;
}

/// Azimuth x elevation grid with its own band filter; each cell keeps the
/// minimum planar radial range (the radial dimension collapses).
inline CylindricalRaster rasterize_cylinder(
    const SurfaceSet& surface, const Pose& pose, const RasterParams& params,
    OpticalAxis axis = OpticalAxis::PlusZ) {
  params.validate();
  CylindricalRaster raster(params);
  raster.center = pose.t;
  raster.heading = sensor_heading_2d(pose, axis);
  const double ref_z = params.cylinder_band_from_ground
                           ? pose.t.z() - params.sensor_height
                           : pose.t.z();
  const Vec2 c(pose.t.x(), pose.t.y());
  for (const Vec3& p : surface.points) {
    const double e = p.z() - ref_z;
    if (e < params.elev_min || e > params.elev_max) continue;
    const Vec2 v(p.x() - c.x(), p.y() - c.y());
    const double r = v.norm();
    if (r > params.r_max || r < 1e-6) continue;
    const int row = std::clamp(
        static_cast<int>((e - params.elev_min) / raster.row_height), 0,
        raster.rows - 1);
    raster.update_min(detail::azimuth_bin(raster.heading, v), row, r);
  }
  return raster;
}

/// Baseline of the evaluation: the raw depth frame alone (already in the
/// world frame), binned exactly like the fused surface.
inline CircularRaster depth_only_circle(const PointCloud& frame,
                                        const Pose& pose,
                                        const RasterParams& params,
                                        OpticalAxis axis = OpticalAxis::PlusZ) {
  if (frame.frame != Frame::World)
    throw Error("depth_only_circle: frame must be in the world frame");
  SurfaceSet pts{frame.points};
  return rasterize_circle(segment_ground(pts, pose.t.z(), params), pose,
                          params, axis);
}

inline CylindricalRaster depth_only_cylinder(
    const PointCloud& frame, const Pose& pose, const RasterParams& params,
    OpticalAxis axis = OpticalAxis::PlusZ) {
  if (frame.frame != Frame::World)
    throw Error("depth_only_cylinder: frame must be in the world frame");
  SurfaceSet pts{frame.points};
  return rasterize_cylinder(pts, pose, params, axis);
}

}  // namespace sonimap

#endif  // SONIMAP_RASTER_HPP
