// sonimap - command line front end: run, sonify, synth-gen, edf-compare,
// eval, brir-gen
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sonimap/brir.hpp"
#include "sonimap/eval.hpp"
#include "sonimap/io/brir_manifest.hpp"
#include "sonimap/io/csv.hpp"
#include "sonimap/io/ply.hpp"
#include "sonimap/io/trajectory.hpp"
#include "sonimap/io/wav.hpp"
#include "sonimap/pipeline.hpp"
#include "sonimap/sonifier.hpp"
#include "sonimap/synth.hpp"

namespace {

using namespace sonimap;
namespace fs = std::filesystem;

struct CommonOpts {
  PipelineConfig config;
  std::string optical_axis = "z";

  void apply_axis() {
    if (optical_axis == "z") config.axis = OpticalAxis::PlusZ;
    else if (optical_axis == "x") config.axis = OpticalAxis::PlusX;
    else throw Error("--optical-axis must be z or x");
  }
};

void add_source_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--trajectory", opts.config.trajectory_path,
                  "TUM trajectory file (dataset mode)");
  cmd->add_option("--clouds", opts.config.cloud_dir,
                  "directory of per-frame PLY clouds (dataset mode)");
  cmd->add_option("--cloud-pattern", opts.config.cloud_pattern,
                  "cloud file name pattern, %06d = frame index");
  cmd->add_option("--scene", opts.config.scene_path,
                  "scene JSON (synthetic mode)");
  cmd->add_option("--gt-dir", opts.config.gt_dir,
                  "stored ground-truth rasters for dataset mode");
}

void add_mapping_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--voxel-size", opts.config.map.voxel_size,
                  "voxel edge length in meters (0.05|0.10|0.15|...)");
  cmd->add_option("--truncation-band", opts.config.map.truncation_band,
                  "TSDF band in meters (default 3 x voxel size)");
  cmd->add_option("--max-range", opts.config.map.max_range,
                  "ignore points farther than this from the sensor");
  cmd->add_option("--carve-rate", opts.config.map.carve_rate,
                  "free-space weight decrement per traversing ray");
  cmd->add_option("--w-max", opts.config.map.w_max, "fusion weight cap");
  cmd->add_option("--r-max", opts.config.raster.r_max,
                  "raster range limit in meters");
  cmd->add_option("--ground-band", opts.config.raster.ground_band,
                  "drop points this close to the floor");
  cmd->add_option("--height-cap", opts.config.raster.height_cap,
                  "top of the human band above the floor");
  cmd->add_option("--sensor-height", opts.config.raster.sensor_height,
                  "sensor height above the floor");
  cmd->add_option("--elevation-rows", opts.config.raster.elevation_rows,
                  "cylinder elevation rows");
  cmd->add_option("--optical-axis", opts.optical_axis,
                  "sensor forward axis: z (depth camera) or x");
  cmd->add_option("--noise-sigma", opts.config.noise_sigma,
                  "Gaussian range noise for scene rendering");
  cmd->add_option("--seed", opts.config.seed, "RNG seed");
}

void parse_frame_range(const std::string& text, PipelineConfig& config) {
  if (text.empty()) return;
  long begin = 0, end = -1, stride = 1;
  const int n = std::sscanf(text.c_str(), "%ld:%ld:%ld", &begin, &end, &stride);
  if (n < 2) throw Error("--frames expects begin:end[:stride]");
  config.frame_begin = begin;
  config.frame_end = end;
  config.stride = stride;
}

int cmd_run(CommonOpts& opts, const std::string& frames, bool baseline,
            bool dump_map, bool write_gt) {
  opts.apply_axis();
  parse_frame_range(frames, opts.config);
  opts.config.with_baseline = baseline;
  opts.config.dump_map = dump_map;
  opts.config.write_gt = write_gt;
  const RunSummary summary = run_pipeline(opts.config);
  std::cout << "replayed " << summary.frames_replayed << " frames, wrote "
            << summary.frames_output << " to " << opts.config.out_dir << "\n";
  return 0;
}

std::vector<io::EventRow> event_rows(const std::vector<SonoEvent>& events) {
  std::vector<io::EventRow> rows;
  for (const auto& ev : events) {
    io::EventRow r;
    r.onset_s = ev.onset_s;
    r.sector = ev.sector;
    r.kind = ev.kind == SonoEvent::Kind::Tap ? "tap" : "woosh";
    r.azimuth_deg = ev.azimuth_deg;
    if (ev.kind == SonoEvent::Kind::Tap) r.distance_m = ev.distance_m;
    r.semitones = ev.semitones;
    rows.push_back(r);
  }
  return rows;
}

int cmd_sonify(CommonOpts& opts, const std::string& circle_csv,
               const std::string& run_dir, long frame,
               const std::string& manifest, bool require_full_grid,
               const std::string& tap_path, const std::string& woosh_path,
               double cadence, double distance_scale,
               const std::string& out_wav, const std::string& out_events) {
  opts.apply_axis();
  CircularRaster circle;
  if (!circle_csv.empty()) {
    circle = io::read_circle_csv(circle_csv);
  } else if (!run_dir.empty()) {
    const auto path = fs::path(run_dir) /
                      detail::format_frame_name("circle_%06d.csv", frame);
    if (!fs::exists(path))
      throw Error("sonify: no stored circle for frame " +
                  std::to_string(frame) + ": " + path.string());
    circle = io::read_circle_csv(path.string());
  } else if (!opts.config.scene_path.empty() ||
             !opts.config.trajectory_path.empty()) {
    circle = replay_to_frame(opts.config, frame).circle;
  } else {
    throw Error("sonify: need --circle, --in, or a pipeline source");
  }

  const BrirStore store = io::parse_brir_manifest(manifest, require_full_grid);
  SweepConfig sweep;
  sweep.cadence_s = cadence;
  sweep.distance_scale = distance_scale;
  sweep.tap = io::read_wav(tap_path);
  sweep.woosh = io::read_wav(woosh_path);

  const auto sectors = aggregate_sectors(circle, sweep.sector_deg);
  const SweepResult result = render_sweep(sectors, store, sweep);
  io::write_wav(out_wav, result.audio);
  if (!out_events.empty())
    io::write_events_csv(out_events, event_rows(result.events));
  std::cout << "wrote " << out_wav << " (" << result.audio.frames()
            << " frames at " << result.audio.sample_rate << " Hz)\n";
  return 0;
}

int cmd_synth_gen(const std::string& scene_path, const std::string& out_dir,
                  CommonOpts& opts, bool gt_rasters) {
  opts.apply_axis();
  const synth::Scene scene = synth::Scene::load(scene_path);
  fs::create_directories(out_dir);

  std::mt19937_64 rng(opts.config.seed);
  const auto records = scene.poses();
  std::vector<io::TrajectoryRecord> written;
  for (long k = 0; k < static_cast<long>(records.size()); ++k) {
    const PointCloud cloud = synth::render_depth_frame(
        scene, records[k].pose, scene.camera, static_cast<int>(k),
        opts.config.noise_sigma, &rng);
    io::write_ply((fs::path(out_dir) /
                   detail::format_frame_name("frame_%06d.ply", k))
                      .string(),
                  cloud.points);
    if (gt_rasters) {
      io::write_circle_csv(
          (fs::path(out_dir) /
           detail::format_frame_name("gt_circle_%06d.csv", k))
              .string(),
          synth::analytic_circle(scene, records[k].pose, opts.config.raster,
                                 static_cast<int>(k), opts.config.axis));
      io::write_cylinder_csv(
          (fs::path(out_dir) /
           detail::format_frame_name("gt_cylinder_%06d.csv", k))
              .string(),
          synth::analytic_cylinder(scene, records[k].pose, opts.config.raster,
                                   static_cast<int>(k), opts.config.axis));
    }
    written.push_back(records[k]);
  }
  io::write_trajectory((fs::path(out_dir) / "trajectory.txt").string(),
                       written);
  std::cout << "wrote " << written.size() << " frames to " << out_dir << "\n";
  return 0;
}

int cmd_edf_compare(CommonOpts& opts, long frame, const std::string& out_csv) {
  opts.apply_axis();
  const FrameSnapshot snap = replay_to_frame(opts.config, frame);
  const auto records = eval::edf_bearing_compare(snap.circle, snap.surface,
                                                 snap.record.pose,
                                                 opts.config.axis);
  std::ofstream out(out_csv);
  if (!out) throw Error("edf-compare: cannot open " + out_csv);
  out << "bin_deg,circle_bearing_deg,circle_range_m,edf_distance_m,"
         "grad_x,grad_y,grad_z,gradient_bearing_deg,angular_diff_deg\n";
  for (const auto& r : records) {
    out << r.bin << ',' << io::detail::format_double(r.circle_bearing_deg)
        << ',' << io::detail::format_double(r.circle_range_m) << ','
        << io::detail::format_double(r.edf_distance_m) << ','
        << io::detail::format_double(r.gradient.x()) << ','
        << io::detail::format_double(r.gradient.y()) << ','
        << io::detail::format_double(r.gradient.z()) << ','
        << io::detail::format_double(r.gradient_bearing_deg) << ','
        << io::detail::format_double(r.angular_diff_deg) << '\n';
  }
  const auto tv = eval::bearing_total_variation(records);
  std::cout << "bearing total variation: circle "
            << io::detail::format_double(tv.circle_tv_deg) << " deg, EDF "
            << io::detail::format_double(tv.gradient_tv_deg) << " deg\n";
  return 0;
}

int cmd_eval(const std::string& est_dir, const std::string& gt_dir,
             const std::string& out_csv) {
  std::vector<io::MetricsRow> rows;
  for (long k = 0;; ++k) {
    const auto est_path =
        fs::path(est_dir) / detail::format_frame_name("circle_%06d.csv", k);
    const auto gt_path =
        fs::path(gt_dir) / detail::format_frame_name("gt_circle_%06d.csv", k);
    if (!fs::exists(est_path) || !fs::exists(gt_path)) {
      if (k == 0)
        throw Error("eval: no matching circle_/gt_circle_ pairs found");
      break;
    }
    const CircularRaster est = io::read_circle_csv(est_path.string());
    const CircularRaster gt = io::read_circle_csv(gt_path.string());
    io::MetricsRow row;
    row.frame_index = k;
    row.rmse_m = eval::rmse(est, gt);
    row.coverage_fraction = eval::coverage(est, gt);
    row.elapsed_ms = 0.0;
    rows.push_back(row);
  }
  io::write_metrics_csv(out_csv, rows);
  std::cout << "wrote " << rows.size() << " rows to " << out_csv << "\n";
  return 0;
}

int cmd_brir_gen(const std::string& out_dir, int sample_rate) {
  const BrirStore store = make_synthetic_brir_store(sample_rate);
  io::write_brir_dataset(out_dir, store);
  io::write_wav((fs::path(out_dir) / "tap.wav").string(),
                make_tap_sound(sample_rate));
  io::write_wav((fs::path(out_dir) / "woosh.wav").string(),
                make_woosh_sound(sample_rate));
  std::cout << "wrote synthetic BRIR grid (" << store.size()
            << " entries) and tap/woosh to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental depth mapping, 360-degree range rasters, and "
               "binaural sonification"};
  app.require_subcommand(1);

  // run
  CommonOpts run_opts;
  std::string run_frames;
  bool run_baseline = false, run_dump = false, run_write_gt = false;
  auto* run = app.add_subcommand("run", "replay a dataset or scene through "
                                        "fusion, rasters, and metrics");
  add_source_options(run, run_opts);
  add_mapping_options(run, run_opts);
  run->add_option("--out", run_opts.config.out_dir, "output directory")
      ->required();
  run->add_option("--frames", run_frames, "begin:end[:stride] output window");
  run->add_flag("--with-baseline", run_baseline,
                "also write single-frame depth rasters");
  run->add_flag("--dump-map", run_dump, "write the final voxel map as CSV");
  run->add_flag("--write-gt", run_write_gt,
                "scene mode: also write ground-truth rasters");

  // sonify
  CommonOpts son_opts;
  std::string son_circle, son_dir, son_manifest, son_tap, son_woosh;
  std::string son_wav = "sweep.wav", son_events;
  long son_frame = 0;
  bool son_full_grid = false;
  double son_cadence = 0.1, son_scale = 1.0;
  auto* sonify = app.add_subcommand(
      "sonify", "render one binaural sweep from a circular raster");
  add_source_options(sonify, son_opts);
  add_mapping_options(sonify, son_opts);
  sonify->add_option("--circle", son_circle, "stored circle CSV");
  sonify->add_option("--in", son_dir, "run output directory");
  sonify->add_option("--frame", son_frame, "frame index");
  sonify->add_option("--brirs", son_manifest, "BRIR manifest JSON")->required();
  sonify->add_flag("--require-full-grid", son_full_grid,
                   "reject manifests missing any 120x10 grid cell");
  sonify->add_option("--tap", son_tap, "mono tap WAV")->required();
  sonify->add_option("--woosh", son_woosh, "mono woosh WAV")->required();
  sonify->add_option("--cadence", son_cadence, "seconds per sector");
  sonify->add_option("--distance-scale", son_scale,
                     "range-to-BRIR-distance scale");
  sonify->add_option("--out", son_wav, "output WAV path");
  sonify->add_option("--events", son_events, "event log CSV path");

  // synth-gen
  CommonOpts gen_opts;
  std::string gen_scene, gen_out;
  bool gen_gt = true;
  auto* gen = app.add_subcommand(
      "synth-gen", "emit PLY frames, a TUM trajectory, and GT rasters "
                   "for a scene");
  gen->add_option("--scene", gen_scene, "scene JSON")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_flag("--gt-rasters,!--no-gt-rasters", gen_gt,
                "write analytic ground-truth rasters");
  add_mapping_options(gen, gen_opts);

  // edf-compare
  CommonOpts edf_opts;
  long edf_frame = 0;
  std::string edf_out = "edf_compare.csv";
  auto* edf = app.add_subcommand(
      "edf-compare", "contrast circle bearings with EDF gradients");
  add_source_options(edf, edf_opts);
  add_mapping_options(edf, edf_opts);
  edf->add_option("--frame", edf_frame, "frame index");
  edf->add_option("--out", edf_out, "comparison CSV path");

  // eval
  std::string eval_est, eval_gt, eval_out = "metrics.csv";
  auto* ev = app.add_subcommand(
      "eval", "compare stored rasters against stored ground truth");
  ev->add_option("--est-dir", eval_est, "directory with circle_*.csv")
      ->required();
  ev->add_option("--gt-dir", eval_gt, "directory with gt_circle_*.csv")
      ->required();
  ev->add_option("--out", eval_out, "metrics CSV path");

  // brir-gen
  std::string brir_out;
  int brir_rate = 48000;
  auto* brir = app.add_subcommand(
      "brir-gen", "write a synthetic full-grid BRIR dataset plus tap/woosh");
  brir->add_option("--out", brir_out, "output directory")->required();
  brir->add_option("--sample-rate", brir_rate, "sample rate in Hz");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(run_opts, run_frames, run_baseline, run_dump,
                     run_write_gt);
    if (sonify->parsed())
      return cmd_sonify(son_opts, son_circle, son_dir, son_frame, son_manifest,
                        son_full_grid, son_tap, son_woosh, son_cadence,
                        son_scale, son_wav, son_events);
    if (gen->parsed()) return cmd_synth_gen(gen_scene, gen_out, gen_opts, gen_gt);
    if (edf->parsed()) return cmd_edf_compare(edf_opts, edf_frame, edf_out);
    if (ev->parsed()) return cmd_eval(eval_est, eval_gt, eval_out);
    if (brir->parsed()) return cmd_brir_gen(brir_out, brir_rate);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
