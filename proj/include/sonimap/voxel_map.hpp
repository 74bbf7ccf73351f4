// sonimap - sparse voxel distance map: projective fusion, free-space
// carving, zero-crossing surface extraction, brute-force EDF queries
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_VOXEL_MAP_HPP
#define SONIMAP_VOXEL_MAP_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sonimap/error.hpp"
#include "sonimap/geometry.hpp"
#include "sonimap/voxel_hash.hpp"

namespace sonimap {

struct VoxelMapParams {
  double voxel_size = 0.05;
  double truncation_band = 0.0;  // 0 -> 3 * voxel_size
  double max_range = 10.0;
  double carve_rate = 1.0;
  double w_max = 100.0;
  double w_surface_min = 2.0;

  double band() const {
    return truncation_band > 0.0 ? truncation_band : 3.0 * voxel_size;
  }
};

struct FrameStats {
  std::size_t points_used = 0;
  std::size_t points_skipped = 0;  // out of range or degenerate rays
  std::size_t voxels_fused = 0;
  std::size_t voxels_carved = 0;  // free-space weight decrements
  std::size_t voxels_erased = 0;
  double elapsed_ms = 0.0;
};

/// Surface extracted as the centers of zero-crossing voxels.
struct SurfaceSet {
  std::vector<Vec3> points;
};

struct EdfResult {
  double distance = 0.0;
  Vec3 gradient{0, 0, 1};
};

/// Hash-indexed voxel grid of fused signed distances.
///
/// Each measured point updates the voxels along the sensor ray: voxels in
/// the truncation band around the hit fuse a projective signed distance by
/// weighted averaging; voxels strictly in front of the band lose weight
/// (free-space carving) and are erased once the weight reaches zero.
///
/// A voxel that is fused and carved by different rays of the same frame
/// keeps the fusion: the frame observed it as surface, and the same-frame
/// free-space decrements are undone. Cross-frame carving is unaffected, so
/// a vanished object is removed after at most ceil(w_max / carve_rate)
/// observing frames.
///
/// Single writer: integrate_frame needs exclusive access. extract_surface
/// returns an immutable snapshot that may be read concurrently.
class SparseVoxelMap {
public:
  explicit SparseVoxelMap(const VoxelMapParams& params = {})
      : params_(params) {
    if (params_.voxel_size <= 0.0)
      throw Error("SparseVoxelMap: voxel_size must be positive");
  }

  const VoxelMapParams& params() const { return params_; }
  std::size_t size() const { return cells_.size(); }

  VoxelIndex voxel_of(const Vec3& p) const {
    return VoxelIndex{
        static_cast<std::int32_t>(std::floor(p.x() / params_.voxel_size)),
        static_cast<std::int32_t>(std::floor(p.y() / params_.voxel_size)),
        static_cast<std::int32_t>(std::floor(p.z() / params_.voxel_size))};
  }

  Vec3 center_of(const VoxelIndex& v) const {
    return Vec3((v.x + 0.5) * params_.voxel_size,
                (v.y + 0.5) * params_.voxel_size,
                (v.z + 0.5) * params_.voxel_size);
  }

  const VoxelCell* cell(const VoxelIndex& v) const {
    return cells_.find(VoxelHashMap::pack(v));
  }

  FrameStats integrate_frame(const Pose& pose, const PointCloud& cloud) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cloud.frame != Frame::World)
      throw Error("integrate_frame: cloud must be in the world frame");
    if (!pose.finite()) throw Error("integrate_frame: non-finite pose");
    if (cloud.points.empty())
      throw Error("integrate_frame: empty cloud");

    ++frame_counter_;
    FrameStats stats;
    const double band = params_.band();

    for (const Vec3& m : cloud.points) {
      const Vec3 seg = m - pose.t;
      const double dist = seg.norm();
      if (dist < 1e-9 || dist > params_.max_range || !m.allFinite()) {
        ++stats.points_skipped;
        continue;
      }
      ++stats.points_used;
      integrate_ray(pose.t, seg / dist, dist, band, stats);
    }

    // Cells driven to zero or below by carving are dropped now so the
    // "weight <= 0 means absent" invariant holds at the API boundary.
    stats.voxels_erased =
        cells_.erase_if([](std::uint64_t, const VoxelCell& c) {
          return c.weight <= 0.f;
        });

    stats.elapsed_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    return stats;
  }

  /// Centers of voxels with |sdf| < voxel_size/2 and weight >= w_surface_min,
  /// in ascending (ix, iy, iz) order.
  SurfaceSet extract_surface() const {
    std::vector<std::uint64_t> keys;
    const float half = static_cast<float>(params_.voxel_size * 0.5);
    const float wmin = static_cast<float>(params_.w_surface_min);
    cells_.for_each([&](std::uint64_t key, const VoxelCell& c) {
      if (std::abs(c.sdf) < half && c.weight >= wmin) keys.push_back(key);
    });
    std::sort(keys.begin(), keys.end());
    SurfaceSet surface;
    surface.points.reserve(keys.size());
    for (std::uint64_t k : keys)
      surface.points.push_back(center_of(VoxelHashMap::unpack(k)));
    return surface;
  }

  template <typename Fn>
  void for_each_cell(Fn fn) const {
    std::vector<std::uint64_t> keys;
    keys.reserve(cells_.size());
    cells_.for_each([&](std::uint64_t key, const VoxelCell&) {
      keys.push_back(key);
    });
    std::sort(keys.begin(), keys.end());
    for (std::uint64_t k : keys) fn(VoxelHashMap::unpack(k), *cells_.find(k));
  }

  void clear() {
    cells_.clear();
    frame_counter_ = 0;
  }

private:
  void integrate_ray(const Vec3& origin, const Vec3& dir, double hit_dist,
                     double band, FrameStats& stats) {
    const double vs = params_.voxel_size;
    const double t_end = hit_dist + band;
    const double carve_before = hit_dist - band;

    VoxelIndex cell{static_cast<std::int32_t>(std::floor(origin.x() / vs)),
                    static_cast<std::int32_t>(std::floor(origin.y() / vs)),
                    static_cast<std::int32_t>(std::floor(origin.z() / vs))};
    const Vec3 end_point = origin + dir * t_end;
    const VoxelIndex end_cell = voxel_of(end_point);

    std::int32_t step[3];
    double t_max[3], t_delta[3];
    const double inf = std::numeric_limits<double>::infinity();
    const std::int32_t* cell_ix[3] = {&cell.x, &cell.y, &cell.z};
    for (int a = 0; a < 3; ++a) {
      const double d = dir[a];
      if (d > 1e-15) {
        step[a] = 1;
        t_max[a] = ((*cell_ix[a] + 1) * vs - origin[a]) / d;
        t_delta[a] = vs / d;
      } else if (d < -1e-15) {
        step[a] = -1;
        t_max[a] = (*cell_ix[a] * vs - origin[a]) / d;
        t_delta[a] = -vs / d;
      } else {
        step[a] = 0;
        t_max[a] = inf;
        t_delta[a] = inf;
      }
    }

    // Upper bound on traversal length guards against FP corner cases where
    // the end cell is never matched exactly.
    const auto max_steps =
        static_cast<std::size_t>(3.0 * t_end / vs) + 8;

    for (std::size_t n = 0; n < max_steps; ++n) {
      const Vec3 center((cell.x + 0.5) * vs, (cell.y + 0.5) * vs,
                        (cell.z + 0.5) * vs);
      const double t_c = (center - origin).dot(dir);
      if (t_c < carve_before)
        carve(cell, stats);
      else
        fuse(cell, std::clamp(hit_dist - t_c, -band, band), stats);

      if (cell == end_cell) break;
      int a = 0;
      if (t_max[1] < t_max[0]) a = 1;
      if (t_max[2] < t_max[a]) a = 2;
      if (t_max[a] > t_end) break;
      t_max[a] += t_delta[a];
      if (a == 0) cell.x += step[0];
      else if (a == 1) cell.y += step[1];
      else cell.z += step[2];
    }
  }

  void fuse(const VoxelIndex& v, double d_new, FrameStats& stats) {
    VoxelCell& c = cells_.find_or_insert(VoxelHashMap::pack(v));
    if (c.carve_stamp == frame_counter_ && c.carved_in_frame > 0.f) {
      // Same-frame reconciliation: this frame saw the voxel as surface, so
      // its earlier free-space decrements are withdrawn.
      c.weight += c.carved_in_frame;
      c.carved_in_frame = 0.f;
    }
    const double w = c.weight;
    c.sdf = static_cast<float>((w * c.sdf + d_new) / (w + 1.0));
    c.weight = static_cast<float>(std::min(w + 1.0, params_.w_max));
    c.hits += 1;
    c.fuse_stamp = frame_counter_;
    ++stats.voxels_fused;
  }

  void carve(const VoxelIndex& v, FrameStats& stats) {
    VoxelCell* c = cells_.find(VoxelHashMap::pack(v));
    if (!c) return;  // carving never creates cells
    if (c->fuse_stamp == frame_counter_) return;  // fuse wins within a frame
    if (c->carve_stamp != frame_counter_) {
      c->carve_stamp = frame_counter_;
      c->carved_in_frame = 0.f;
    }
    c->weight -= static_cast<float>(params_.carve_rate);
    c->carved_in_frame += static_cast<float>(params_.carve_rate);
    ++stats.voxels_carved;
  }

  VoxelMapParams params_;
  VoxelHashMap cells_;
  std::uint32_t frame_counter_ = 0;
};

/// Brute-force nearest-surface query: distance and the unit gradient
/// pointing away from the closest surface point. Ties break toward the
/// lowest point index; a query exactly on a surface point reports distance
/// zero with the documented fallback gradient (0, 0, 1).
inline EdfResult edf_query(const SurfaceSet& surface, const Vec3& q) {
  if (surface.points.empty())
    throw Error("edf_query: empty surface");
  double best_sq = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t i = 0; i < surface.points.size(); ++i) {
    const double d2 = (q - surface.points[i]).squaredNorm();
    if (d2 < best_sq) {
      best_sq = d2;
      best = i;
    }
  }
  EdfResult res;
  res.distance = std::sqrt(best_sq);
  if (res.distance > 0.0)
    res.gradient = (q - surface.points[best]) / res.distance;
  else
    res.gradient = Vec3(0, 0, 1);
  return res;
}

}  // namespace sonimap

#endif  // SONIMAP_VOXEL_MAP_HPP
