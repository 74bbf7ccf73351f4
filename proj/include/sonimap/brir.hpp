// sonimap - binaural room impulse response store on the (azimuth, distance)
// recording grid, nearest-entry selection, synthetic test fixtures
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_BRIR_HPP
#define SONIMAP_BRIR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sonimap/audio.hpp"
#include "sonimap/error.hpp"
#include "sonimap/geometry.hpp"

namespace sonimap {

/// Stereo impulse responses keyed by signed azimuth (degrees) and distance
/// (meters). The recorded grid is azimuth {-177, -174, ..., 180} (step 3)
/// and distance {0.4, 0.8, ..., 4.0} (step 0.4). Entries are indexed by
/// millidegree/millimeter integers so float keys from a manifest land
/// exactly.
class BrirStore {
public:
  static constexpr int kAzimuthCount = 120;
  static constexpr int kDistanceCount = 10;
  static constexpr int kAzimuthStepMilli = 3000;    // 3 degrees
  static constexpr int kDistanceStepMm = 400;       // 0.4 m

  explicit BrirStore(int sample_rate = 48000) : sample_rate_(sample_rate) {}

  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return entries_.size(); }

  /// Signed grid azimuth for index 0..119: -177, -174, ..., 180.
  static double grid_azimuth_deg(int i) { return -177.0 + 3.0 * i; }
  /// Grid distance for index 0..9: 0.4, 0.8, ..., 4.0.
  static double grid_distance_m(int i) { return 0.4 * (i + 1); }

  void add(double azimuth_deg, double distance_m, AudioBuffer ir,
           const std::string& origin = "") {
    if (ir.channels != 2)
      throw Error("BrirStore: impulse responses must be stereo" +
                  (origin.empty() ? "" : " (" + origin + ")"));
    if (ir.sample_rate != sample_rate_)
      throw Error("BrirStore: sample rate mismatch: store " +
                  std::to_string(sample_rate_) + " Hz, entry " +
                  std::to_string(ir.sample_rate) + " Hz" +
                  (origin.empty() ? "" : " (" + origin + ")"));
    const std::uint64_t k = key(azimuth_deg, distance_m);
    if (entries_.count(k))
      throw DuplicateKeyError(
          origin, 0,
          "duplicate BRIR entry (azimuth " + std::to_string(azimuth_deg) +
              ", distance " + std::to_string(distance_m) + ")");
    entries_.emplace(k, std::move(ir));
  }

  bool has(double azimuth_deg, double distance_m) const {
    return entries_.count(key(azimuth_deg, distance_m)) != 0;
  }

  const AudioBuffer& get(double azimuth_deg, double distance_m) const {
    const auto it = entries_.find(key(azimuth_deg, distance_m));
    if (it == entries_.end())
      throw Error("BrirStore: missing grid cell (azimuth " +
                  std::to_string(azimuth_deg) + ", distance " +
                  std::to_string(distance_m) + ")");
    return it->second;
  }

  /// Throws naming the first missing cell of the full 120 x 10 grid.
  void validate_full_grid() const {
    for (int a = 0; a < kAzimuthCount; ++a)
      for (int d = 0; d < kDistanceCount; ++d)
        if (!has(grid_azimuth_deg(a), grid_distance_m(d)))
          throw Error("BrirStore: grid incomplete, first missing cell is "
                      "(azimuth " +
                      std::to_string(grid_azimuth_deg(a)) + ", distance " +
                      std::to_string(grid_distance_m(d)) + ")");
  }

private:
  static std::uint64_t key(double azimuth_deg, double distance_m) {
    const auto az = static_cast<std::int64_t>(std::llround(azimuth_deg * 1000.0));
    const auto mm = static_cast<std::int64_t>(std::llround(distance_m * 1000.0));
    return (static_cast<std::uint64_t>(az + 360000) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(mm));
  }

  int sample_rate_;
  std::unordered_map<std::uint64_t, AudioBuffer> entries_;
};

struct BrirSelection {
  double azimuth_deg = 0.0;   // snapped signed grid azimuth
  double distance_m = 0.0;    // snapped grid distance
  const AudioBuffer* ir = nullptr;
};

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

}  // namespace detail

/// Snaps an azimuth in [0, 360) and a clamped distance to the nearest grid
/// entry and returns it. Ties round toward +azimuth and toward the larger
/// distance. Snapping is integer arithmetic on millidegrees/millimeters, so
/// it is exact and total over the whole input domain.
inline BrirSelection select_brir(const BrirStore& store, double azimuth_deg,
                                 double distance_m) {
  // to signed (-180, 180]
  const double signed_az = azimuth_deg > 180.0 ? azimuth_deg - 360.0
                                               : azimuth_deg;
  auto az_milli = static_cast<std::int64_t>(std::llround(signed_az * 1000.0));
  std::int64_t snapped_az =
      detail::floor_div(az_milli + BrirStore::kAzimuthStepMilli / 2,
                        BrirStore::kAzimuthStepMilli) *
      BrirStore::kAzimuthStepMilli;
  if (snapped_az <= -180000) snapped_az += 360000;  // -180 folds onto 180

  auto mm = static_cast<std::int64_t>(std::llround(distance_m * 1000.0));
  std::int64_t idx = detail::floor_div(mm + BrirStore::kDistanceStepMm / 2,
                                       BrirStore::kDistanceStepMm);
  idx = std::clamp<std::int64_t>(idx, 1, BrirStore::kDistanceCount);

  BrirSelection sel;
  sel.azimuth_deg = static_cast<double>(snapped_az) / 1000.0;
  sel.distance_m = static_cast<double>(idx) * 0.4;
  sel.ir = &store.get(sel.azimuth_deg, sel.distance_m);
  return sel;
}

// --- synthetic fixtures -------------------------------------------------
//
// Spherical-head style impulses: interaural time difference from a head
// radius, level difference toward the near ear, 1/distance amplitude.
// These stand in for recorded responses in tests and demos only.

inline AudioBuffer make_synthetic_brir(double azimuth_deg, double distance_m,
                                       int sample_rate) {
  constexpr double kSpeedOfSound = 343.0;
  constexpr double kMaxItd = 0.00066;  // seconds, ~head radius * 2 / c

  const double az_rad = deg2rad(azimuth_deg);
  const double base_delay = distance_m / kSpeedOfSound;
  const double itd = kMaxItd * std::sin(az_rad);  // +azimuth = left = earlier
  const double gain = 1.0 / distance_m;
  const double left_gain = gain * std::max(0.15, 1.0 + 0.3 * std::sin(az_rad));
  const double right_gain = gain * std::max(0.15, 1.0 - 0.3 * std::sin(az_rad));

  const auto left_at = static_cast<std::size_t>(
      std::llround((base_delay - itd / 2) * sample_rate));
  const auto right_at = static_cast<std::size_t>(
      std::llround((base_delay + itd / 2) * sample_rate));

  AudioBuffer ir;
  ir.sample_rate = sample_rate;
  ir.channels = 2;
  const std::size_t frames = std::max(left_at, right_at) + 32;
  ir.samples.assign(frames * 2, 0.f);
  ir.sample(0, left_at) = static_cast<float>(left_gain);
  ir.sample(1, right_at) = static_cast<float>(right_gain);
  // short decaying tail so the responses are not pure delta pairs
  for (std::size_t i = 1; i < 24; ++i) {
    const double decay = 0.12 * std::exp(-static_cast<double>(i) / 6.0);
    if (left_at + i < frames)
      ir.sample(0, left_at + i) += static_cast<float>(left_gain * decay);
    if (right_at + i < frames)
      ir.sample(1, right_at + i) += static_cast<float>(right_gain * decay);
  }
  return ir;
}

inline BrirStore make_synthetic_brir_store(int sample_rate = 48000) {
  BrirStore store(sample_rate);
  for (int a = 0; a < BrirStore::kAzimuthCount; ++a)
    for (int d = 0; d < BrirStore::kDistanceCount; ++d)
      store.add(BrirStore::grid_azimuth_deg(a), BrirStore::grid_distance_m(d),
                make_synthetic_brir(BrirStore::grid_azimuth_deg(a),
                                    BrirStore::grid_distance_m(d),
                                    sample_rate));
  return store;
}

/// Short decaying tone burst used as the default tap fixture.
inline AudioBuffer make_tap_sound(int sample_rate) {
  AudioBuffer tap;
  tap.sample_rate = sample_rate;
  tap.channels = 1;
  const auto n = static_cast<std::size_t>(0.03 * sample_rate);
  tap.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    tap.samples[i] = static_cast<float>(
        0.7 * std::sin(2.0 * kPi * 1100.0 * t) * std::exp(-t / 0.004));
  }
  return tap;
}

/// Filtered-noise swell used as the default woosh fixture.
inline AudioBuffer make_woosh_sound(int sample_rate) {
  AudioBuffer woosh;
  woosh.sample_rate = sample_rate;
  woosh.channels = 1;
  const auto n = static_cast<std::size_t>(0.08 * sample_rate);
  woosh.samples.resize(n);
  std::uint64_t state = 0x853C49E6748FEA9Bull;
  double lp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    const double white =
        static_cast<double>(static_cast<std::int64_t>(state >> 11)) /
        static_cast<double>(1ll << 52) - 1.0;
    lp += 0.08 * (white - lp);
    const double env = std::sin(kPi * static_cast<double>(i) / n);
    woosh.samples[i] = static_cast<float>(0.8 * env * lp);
  }
  return woosh;
}

}  // namespace sonimap

#endif  // SONIMAP_BRIR_HPP
