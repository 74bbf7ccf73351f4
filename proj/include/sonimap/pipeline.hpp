// sonimap - dataset/scene replay pipeline: fuse, snapshot, rasterize,
// evaluate, write artifacts
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_PIPELINE_HPP
#define SONIMAP_PIPELINE_HPP

#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sonimap/error.hpp"
#include "sonimap/eval.hpp"
#include "sonimap/geometry.hpp"
#include "sonimap/io/csv.hpp"
#include "sonimap/io/ply.hpp"
#include "sonimap/io/trajectory.hpp"
#include "sonimap/raster.hpp"
#include "sonimap/synth.hpp"
#include "sonimap/voxel_map.hpp"

namespace sonimap {

struct PipelineConfig {
  // Exactly one input source: a trajectory+cloud dataset or a scene file.
  std::string trajectory_path;
  std::string cloud_dir;
  std::string cloud_pattern = "frame_%06d.ply";
  std::string scene_path;

  VoxelMapParams map;
  RasterParams raster;
  OpticalAxis axis = OpticalAxis::PlusZ;
  double noise_sigma = 0.0;   // scene mode sensor noise
  std::uint64_t seed = 0;

  long frame_begin = 0;
  long frame_end = -1;  // exclusive, -1 = all frames
  long stride = 1;

  std::string out_dir;  // empty = keep everything in memory
  std::string gt_dir;   // dataset mode: stored GT rasters to compare against
  bool with_baseline = false;
  bool write_gt = false;
  bool dump_map = false;
};

struct FrameOutput {
  long frame_index = 0;
  io::TrajectoryRecord record;
  CircularRaster circle;
  CylindricalRaster cylinder;
  std::optional<CircularRaster> gt_circle;
  std::optional<CylindricalRaster> gt_cylinder;
  std::optional<CircularRaster> depth_circle;
  std::optional<CylindricalRaster> depth_cylinder;
  FrameStats fuse_stats;
  eval::FrameMetrics metrics;
};

struct RunSummary {
  long frames_replayed = 0;
  long frames_output = 0;
  std::vector<eval::FrameMetrics> metrics;
};

namespace detail {

/// Substitutes the single %d / %0Nd directive in a file-name pattern.
inline std::string format_frame_name(const std::string& pattern, long k) {
  const auto pos = pattern.find('%');
  if (pos == std::string::npos)
    throw Error("cloud pattern needs a %d directive: " + pattern);
  std::size_t end = pos + 1;
  while (end < pattern.size() && std::isdigit(pattern[end])) ++end;
  if (end >= pattern.size() || pattern[end] != 'd')
    throw Error("cloud pattern needs a %d directive: " + pattern);
  const std::string dir = pattern.substr(pos, end - pos + 1);
  char buf[64];
  std::snprintf(buf, sizeof(buf), dir.c_str(), k);
  return pattern.substr(0, pos) + buf + pattern.substr(end + 1);
}

}  // namespace detail

/// Replayable frame source: either a stored dataset (TUM trajectory plus
/// one PLY per record) or a synthetic scene rendered on the fly.
class FrameSource {
public:
  explicit FrameSource(const PipelineConfig& config) : config_(config) {
    const bool dataset = !config.trajectory_path.empty();
    const bool scene = !config.scene_path.empty();
    if (dataset == scene)
      throw Error(
          "pipeline: exactly one input source required (dataset or scene)");
    if (dataset) {
      if (config.cloud_dir.empty())
        throw Error("pipeline: dataset input needs a cloud directory");
      records_ = io::parse_trajectory(config.trajectory_path);
      if (records_.empty())
        throw Error("pipeline: trajectory is empty: " + config.trajectory_path);
    } else {
      scene_ = synth::Scene::load(config.scene_path);
      records_ = scene_->poses();
    }
    rng_.seed(config.seed);
  }

  long frame_count() const { return static_cast<long>(records_.size()); }
  const io::TrajectoryRecord& record(long k) const { return records_[k]; }
  bool scene_mode() const { return scene_.has_value(); }
  const synth::Scene& scene() const { return *scene_; }

  PointCloud sensor_cloud(long k) {
    if (scene_) {
      return synth::render_depth_frame(*scene_, records_[k].pose,
                                       scene_->camera, static_cast<int>(k),
                                       config_.noise_sigma, &rng_);
    }
    const auto name = detail::format_frame_name(config_.cloud_pattern, k);
    const auto path =
        (std::filesystem::path(config_.cloud_dir) / name).string();
    if (!std::filesystem::exists(path))
      throw Error("pipeline: no cloud file for frame " + std::to_string(k) +
                  " (timestamp " + std::to_string(records_[k].timestamp) +
                  "): " + path);
    return io::parse_ply(path);
  }

  std::optional<CircularRaster> gt_circle(long k, const Pose& pose) const {
    if (scene_)
      return synth::analytic_circle(*scene_, pose, config_.raster,
                                    static_cast<int>(k), config_.axis);
    if (config_.gt_dir.empty()) return std::nullopt;
    const auto path = std::filesystem::path(config_.gt_dir) /
                      detail::format_frame_name("gt_circle_%06d.csv", k);
    if (!std::filesystem::exists(path)) return std::nullopt;
    return io::read_circle_csv(path.string());
  }

  std::optional<CylindricalRaster> gt_cylinder(long k, const Pose& pose) const {
    if (scene_)
      return synth::analytic_cylinder(*scene_, pose, config_.raster,
                                      static_cast<int>(k), config_.axis);
    if (config_.gt_dir.empty()) return std::nullopt;
    const auto path = std::filesystem::path(config_.gt_dir) /
                      detail::format_frame_name("gt_cylinder_%06d.csv", k);
    if (!std::filesystem::exists(path)) return std::nullopt;
    return io::read_cylinder_csv(path.string());
  }

private:
  PipelineConfig config_;
  std::optional<synth::Scene> scene_;
  std::vector<io::TrajectoryRecord> records_;
  std::mt19937_64 rng_;
};

/// Runs the replay: every frame is fused; frames selected by the
/// begin/end/stride window additionally get rasters, metrics, and file
/// outputs. The optional callback sees each selected frame's outputs.
inline RunSummary run_pipeline(
    const PipelineConfig& config,
    const std::function<void(const FrameOutput&)>& on_frame = {}) {
  using clock = std::chrono::steady_clock;
  namespace fs = std::filesystem;

  config.raster.validate();
  FrameSource source(config);
  SparseVoxelMap map(config.map);

  const long n = source.frame_count();
  const long end = config.frame_end < 0
                       ? n
                       : std::min<long>(config.frame_end, n);
  const long stride = std::max<long>(1, config.stride);

  const bool writing = !config.out_dir.empty();
  if (writing) fs::create_directories(config.out_dir);
  auto out_path = [&](const std::string& pattern, long k) {
    return (fs::path(config.out_dir) /
            detail::format_frame_name(pattern, k))
        .string();
  };

  RunSummary summary;
  std::vector<io::MetricsRow> metric_rows;
  std::vector<std::string> detail_rows;

  for (long k = 0; k < end; ++k) {
    const auto& rec = source.record(k);
    const PointCloud sensor = source.sensor_cloud(k);
    const PointCloud world = transform_to_world(rec.pose, sensor);

    const auto t0 = clock::now();
    FrameStats fuse_stats;
    if (!world.points.empty())
      fuse_stats = map.integrate_frame(rec.pose, world);
    const auto t1 = clock::now();
    ++summary.frames_replayed;

    const bool selected =
        k >= config.frame_begin && (k - config.frame_begin) % stride == 0;
    if (!selected) continue;

    FrameOutput out;
    out.frame_index = k;
    out.record = rec;
    out.fuse_stats = fuse_stats;

    const SurfaceSet surface = map.extract_surface();
    const SurfaceSet human_band =
        segment_ground(surface, rec.pose.t.z(), config.raster);
    const auto t2 = clock::now();
    out.circle = rasterize_circle(human_band, rec.pose, config.raster,
                                  config.axis);
    const auto t3 = clock::now();
    out.cylinder = rasterize_cylinder(surface, rec.pose, config.raster,
                                      config.axis);
    const auto t4 = clock::now();

    out.gt_circle = source.gt_circle(k, rec.pose);
    out.gt_cylinder = source.gt_cylinder(k, rec.pose);
    if (config.with_baseline) {
      out.depth_circle =
          depth_only_circle(world, rec.pose, config.raster, config.axis);
      out.depth_cylinder =
          depth_only_cylinder(world, rec.pose, config.raster, config.axis);
    }

    auto& m = out.metrics;
    m.frame_index = k;
    m.fuse_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    m.circle_ms = std::chrono::duration<double, std::milli>(t3 - t2).count();
    m.cylinder_ms = std::chrono::duration<double, std::milli>(t4 - t3).count();
    m.total_ms = m.fuse_ms + m.circle_ms + m.cylinder_ms;
    if (out.gt_circle) {
      m.rmse_m = eval::rmse(out.circle, *out.gt_circle);
      m.coverage = eval::coverage(out.circle, *out.gt_circle);
      if (out.depth_circle) {
        m.rmse_depth_m = eval::rmse(*out.depth_circle, *out.gt_circle);
        m.coverage_depth = eval::coverage(*out.depth_circle, *out.gt_circle);
      }
    }
    if (out.gt_cylinder) {
      m.rmse_cyl_m = eval::rmse(out.cylinder, *out.gt_cylinder);
      m.coverage_cyl = eval::coverage(out.cylinder, *out.gt_cylinder);
      if (out.depth_cylinder) {
        m.rmse_depth_cyl_m = eval::rmse(*out.depth_cylinder, *out.gt_cylinder);
        m.coverage_depth_cyl =
            eval::coverage(*out.depth_cylinder, *out.gt_cylinder);
      }
    }

    if (writing) {
      io::write_circle_csv(out_path("circle_%06d.csv", k), out.circle);
      io::write_cylinder_csv(out_path("cylinder_%06d.csv", k), out.cylinder);
      if (config.write_gt && out.gt_circle) {
        io::write_circle_csv(out_path("gt_circle_%06d.csv", k),
                             *out.gt_circle);
        io::write_cylinder_csv(out_path("gt_cylinder_%06d.csv", k),
                               *out.gt_cylinder);
      }
      if (out.depth_circle) {
        io::write_circle_csv(out_path("depth_circle_%06d.csv", k),
                             *out.depth_circle);
        io::write_cylinder_csv(out_path("depth_cylinder_%06d.csv", k),
                               *out.depth_cylinder);
      }
    }

    io::MetricsRow row;
    row.frame_index = k;
    row.rmse_m = m.rmse_m;
    row.coverage_fraction = m.coverage;
    row.elapsed_ms = m.total_ms;
    metric_rows.push_back(row);

    {
      auto opt = [](const std::optional<double>& v) {
        return v ? io::detail::format_double(*v) : std::string();
      };
      std::string line = std::to_string(k);
      for (const auto& v :
           {opt(m.rmse_m), opt(m.rmse_cyl_m), opt(m.coverage),
            opt(m.coverage_cyl), opt(m.rmse_depth_m), opt(m.coverage_depth),
            opt(m.rmse_depth_cyl_m), opt(m.coverage_depth_cyl),
            io::detail::format_double(m.fuse_ms),
            io::detail::format_double(m.circle_ms),
            io::detail::format_double(m.cylinder_ms),
            io::detail::format_double(m.total_ms)})
        line += "," + v;
      detail_rows.push_back(line);
    }

    summary.metrics.push_back(m);
    ++summary.frames_output;
    if (on_frame) on_frame(out);
  }

  if (writing) {
    io::write_metrics_csv(
        (fs::path(config.out_dir) / "metrics.csv").string(), metric_rows);
    std::ofstream det(fs::path(config.out_dir) / "metrics_detail.csv");
    det << "frame_index,rmse_m,rmse_cyl_m,coverage,coverage_cyl,"
           "rmse_depth_m,coverage_depth,rmse_depth_cyl_m,coverage_depth_cyl,"
           "fuse_ms,circle_ms,cylinder_ms,total_ms\n";
    for (const auto& line : detail_rows) det << line << '\n';
    if (config.dump_map)
      io::write_map_dump((fs::path(config.out_dir) / "map.csv").string(), map);
  }
  return summary;
}

/// State of the pipeline after fusing frames 0..frame (inclusive), for the
/// edf-compare command and sonification of live pipeline state.
struct FrameSnapshot {
  io::TrajectoryRecord record;
  SurfaceSet surface;       // full surface (unsegmented)
  SurfaceSet human_band;    // ground-segmented
  CircularRaster circle;
  CylindricalRaster cylinder;
};

inline FrameSnapshot replay_to_frame(const PipelineConfig& config,
                                     long frame) {
  config.raster.validate();
  FrameSource source(config);
  if (frame < 0 || frame >= source.frame_count())
    throw Error("replay_to_frame: frame " + std::to_string(frame) +
                " out of range (have " +
                std::to_string(source.frame_count()) + " frames)");
  SparseVoxelMap map(config.map);
  for (long k = 0; k <= frame; ++k) {
    const auto& rec = source.record(k);
    const PointCloud world =
        transform_to_world(rec.pose, source.sensor_cloud(k));
    if (!world.points.empty()) map.integrate_frame(rec.pose, world);
  }
  FrameSnapshot snap;
  snap.record = source.record(frame);
  snap.surface = map.extract_surface();
  snap.human_band =
      segment_ground(snap.surface, snap.record.pose.t.z(), config.raster);
  snap.circle = rasterize_circle(snap.human_band, snap.record.pose,
                                 config.raster, config.axis);
  snap.cylinder = rasterize_cylinder(snap.surface, snap.record.pose,
                                     config.raster, config.axis);
  return snap;
}

}  // namespace sonimap

#endif  // SONIMAP_PIPELINE_HPP
