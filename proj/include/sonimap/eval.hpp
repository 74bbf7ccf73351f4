// sonimap - evaluation metrics: RMSE, coverage, EDF bearing comparison
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_EVAL_HPP
#define SONIMAP_EVAL_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "sonimap/error.hpp"
#include "sonimap/geometry.hpp"
#include "sonimap/raster.hpp"
#include "sonimap/voxel_map.hpp"

namespace sonimap::eval {

struct FrameMetrics {
  long frame_index = 0;
  std::optional<double> rmse_m;        // circle
  std::optional<double> rmse_cyl_m;
  std::optional<double> coverage;      // circle
  std::optional<double> coverage_cyl;
  std::optional<double> rmse_depth_m;      // single-frame baseline
  std::optional<double> coverage_depth;
  std::optional<double> rmse_depth_cyl_m;
  std::optional<double> coverage_depth_cyl;
  double fuse_ms = 0.0;
  double circle_ms = 0.0;
  double cylinder_ms = 0.0;
  double total_ms = 0.0;
};

namespace detail {

inline std::optional<double> rmse_cells(const std::vector<double>& est_range,
                                        const std::vector<std::uint8_t>& est_known,
                                        const std::vector<double>& gt_range,
                                        const std::vector<std::uint8_t>& gt_known) {
  if (est_range.size() != gt_range.size())
    throw Error("rmse: raster dimensions differ");
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < est_range.size(); ++i) {
    if (!est_known[i] || !gt_known[i]) continue;
    const double d = est_range[i] - gt_range[i];
    sum_sq += d * d;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::sqrt(sum_sq / static_cast<double>(n));
}

inline double coverage_cells(const std::vector<std::uint8_t>& est_known,
                             const std::vector<std::uint8_t>& ref_known) {
  if (est_known.size() != ref_known.size())
    throw Error("coverage: raster dimensions differ");
  std::size_t both = 0, ref = 0;
  for (std::size_t i = 0; i < est_known.size(); ++i) {
    if (ref_known[i]) {
      ++ref;
      if (est_known[i]) ++both;
    }
  }
  if (ref == 0) throw Error("coverage: reference raster is all-unknown");
  return static_cast<double>(both) / static_cast<double>(ref);
}

}  // namespace detail

/// Root-mean-square range difference over cells known in BOTH rasters;
/// absent when the intersection is empty.
inline std::optional<double> rmse(const CircularRaster& est,
                                  const CircularRaster& truth) {
  return detail::rmse_cells(est.range, est.known, truth.range, truth.known);
}

inline std::optional<double> rmse(const CylindricalRaster& est,
                                  const CylindricalRaster& truth) {
  if (est.rows != truth.rows) throw Error("rmse: cylinder row counts differ");
  return detail::rmse_cells(est.range, est.known, truth.range, truth.known);
}

/// Fraction of the reference's known cells that the estimate also knows.
inline double coverage(const CircularRaster& est, const CircularRaster& ref) {
  return detail::coverage_cells(est.known, ref.known);
}

inline double coverage(const CylindricalRaster& est,
                       const CylindricalRaster& ref) {
  if (est.rows != ref.rows) throw Error("coverage: cylinder row counts differ");
  return detail::coverage_cells(est.known, ref.known);
}

/// Per-bin contrast between the circle's ray bearings and the EDF gradient
/// at the bin's point on a unit circle around the sensor.
struct BearingRecord {
  int bin = 0;
  double circle_bearing_deg = 0.0;    // world bearing of the bin ray
  double circle_range_m = 0.0;
  double edf_distance_m = 0.0;
  Vec3 gradient{0, 0, 1};
  double gradient_bearing_deg = 0.0;  // world bearing of the gradient XY part
  double angular_diff_deg = 0.0;      // wrapped gradient minus ray bearing
};

inline std::vector<BearingRecord> edf_bearing_compare(
    const CircularRaster& circle, const SurfaceSet& surface, const Pose& pose,
    OpticalAxis axis = OpticalAxis::PlusZ) {
  const Vec2 heading = sensor_heading_2d(pose, axis);
  const double heading_bearing = bearing_deg(heading);
  std::vector<BearingRecord> records;
  for (int b = 0; b < CircularRaster::kBins; ++b) {
    if (!circle.is_known(b)) continue;
    BearingRecord rec;
    rec.bin = b;
    rec.circle_bearing_deg = wrap_deg_360(heading_bearing + b + 0.5);
    rec.circle_range_m = circle.range[b];
    const double theta = deg2rad(rec.circle_bearing_deg);
    const Vec3 q(pose.t.x() + std::cos(theta), pose.t.y() + std::sin(theta),
                 pose.t.z());
    const EdfResult edf = edf_query(surface, q);  // throws on empty surface
    rec.edf_distance_m = edf.distance;
    rec.gradient = edf.gradient;
    const Vec2 g_xy(edf.gradient.x(), edf.gradient.y());
    rec.gradient_bearing_deg =
        g_xy.norm() > 1e-9 ? bearing_deg(g_xy) : rec.circle_bearing_deg;
    rec.angular_diff_deg =
        wrap_deg_180(rec.gradient_bearing_deg - rec.circle_bearing_deg);
    records.push_back(rec);
  }
  return records;
}

struct BearingVariation {
  double circle_tv_deg = 0.0;
  double gradient_tv_deg = 0.0;
};

/// Total variation of the two bearing sequences over cyclically adjacent
/// known-bin pairs. The circle side contributes exactly 1 degree per pair;
/// the EDF gradient side quantifies how much the gradients "slip around".
inline BearingVariation bearing_total_variation(
    const std::vector<BearingRecord>& records) {
  BearingVariation tv;
  if (records.size() < 2) return tv;
  // records are in ascending bin order
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& a = records[i];
    const auto& b = records[(i + 1) % records.size()];
    const int gap = (b.bin - a.bin + CircularRaster::kBins) %
                    CircularRaster::kBins;
    if (gap != 1) continue;  // only adjacent bins
    tv.circle_tv_deg +=
        std::abs(wrap_deg_180(b.circle_bearing_deg - a.circle_bearing_deg));
    tv.gradient_tv_deg +=
        std::abs(wrap_deg_180(b.gradient_bearing_deg - a.gradient_bearing_deg));
  }
  return tv;
}

}  // namespace sonimap::eval

#endif  // SONIMAP_EVAL_HPP
