// sonimap - circular raster to binaural sweep: sector aggregation, distance
// mapping, pitch cues, BRIR convolution, event scheduling
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_SONIFIER_HPP
#define SONIMAP_SONIFIER_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "sonimap/audio.hpp"
#include "sonimap/brir.hpp"
#include "sonimap/error.hpp"
#include "sonimap/raster.hpp"

namespace sonimap {

struct SweepConfig {
  int sector_deg = 10;        // must divide 360
  double cadence_s = 0.1;     // one sector per cadence
  double distance_scale = 1.0;
  AudioBuffer tap;            // mono
  AudioBuffer woosh;          // mono
};

struct SectorAggregate {
  bool known = false;
  int bin_deg = 0;      // angle of the minimum-range bin
  double range_m = 0.0;
};

/// One scheduled sector sound of a sweep.
struct SonoEvent {
  enum class Kind { Tap, Woosh };

  int sector = 0;
  Kind kind = Kind::Woosh;
  double azimuth_deg = 0.0;   // bin angle for taps, sector center for wooshes
  double distance_m = std::numeric_limits<double>::quiet_NaN();  // taps only
  int semitones = 0;
  double onset_s = 0.0;
};

struct SweepResult {
  AudioBuffer audio;  // stereo
  std::vector<SonoEvent> events;
};

/// Groups the 360 bins into 360/sector_deg sectors and picks each sector's
/// minimum known range; ties break toward the lowest angle.
inline std::vector<SectorAggregate> aggregate_sectors(
    const CircularRaster& circle, int sector_deg = 10) {
  if (sector_deg <= 0 || 360 % sector_deg != 0)
    throw Error("aggregate_sectors: sector_deg must divide 360");
  const int n = 360 / sector_deg;
  std::vector<SectorAggregate> sectors(n);
  for (int s = 0; s < n; ++s) {
    SectorAggregate agg;
    for (int b = s * sector_deg; b < (s + 1) * sector_deg; ++b) {
      if (!circle.is_known(b)) continue;
      if (!agg.known || circle.range[b] < agg.range_m) {
        agg.known = true;
        agg.bin_deg = b;
        agg.range_m = circle.range[b];
      }
    }
    sectors[s] = agg;
  }
  return sectors;
}

/// Scales a range into the BRIR distance span and clamps to [0.4, 4.0].
inline double map_distance(double range_m, double distance_scale = 1.0) {
  if (range_m <= 0.0) throw Error("map_distance: range must be positive");
  return std::clamp(range_m * distance_scale, 0.4, 4.0);
}

/// Pitch cue: closer than 1.5 m shifts down four semitones, farther than
/// 2.5 m shifts up four; the boundaries themselves stay unshifted.
inline int pitch_class(double clamped_distance_m) {
  if (clamped_distance_m < 1.5) return -4;
  if (clamped_distance_m > 2.5) return +4;
  return 0;
}

/// Playback-rate resampling by 2^(semitones/12) with linear interpolation.
/// Duration scales by the inverse factor; zero semitones is bit-identical.
inline AudioBuffer pitch_shift(const AudioBuffer& buf, int semitones) {
  if (buf.channels != 1) throw Error("pitch_shift: mono buffer required");
  if (semitones == 0) return buf;
  const double factor = std::exp2(semitones / 12.0);
  const std::size_t n = buf.samples.size();
  AudioBuffer out;
  out.sample_rate = buf.sample_rate;
  out.channels = 1;
  if (n == 0) return out;
  const auto out_len =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) / factor));
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * factor;
    const auto i0 = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i0);
    const float s0 = buf.samples[i0];
    const float s1 = buf.samples[i0 + 1 < n ? i0 + 1 : n - 1];
    out.samples[i] = static_cast<float>(s0 + frac * (s1 - s0));
  }
  return out;
}

/// Renders one counter-clockwise sweep: one event per sector at the sweep
/// cadence, taps pitch-shifted and convolved with the selected BRIR, wooshes
/// convolved with the far (4 m) BRIR at the sector center. The mix is peak
/// normalized to 0.99 only if it clips.
inline SweepResult render_sweep(const std::vector<SectorAggregate>& sectors,
                                const BrirStore& store,
                                const SweepConfig& cfg) {
  if (cfg.sector_deg <= 0 || 360 % cfg.sector_deg != 0)
    throw Error("render_sweep: sector_deg must divide 360");
  if (sectors.size() != static_cast<std::size_t>(360 / cfg.sector_deg))
    throw Error("render_sweep: sector count does not match sector_deg");
  if (cfg.tap.channels != 1 || cfg.woosh.channels != 1)
    throw Error("render_sweep: tap and woosh must be mono");
  if (cfg.tap.sample_rate != store.sample_rate() ||
      cfg.woosh.sample_rate != store.sample_rate())
    throw Error("render_sweep: sample rate mismatch: store " +
                std::to_string(store.sample_rate()) + " Hz, tap " +
                std::to_string(cfg.tap.sample_rate) + " Hz, woosh " +
                std::to_string(cfg.woosh.sample_rate) + " Hz");
  if (cfg.tap.samples.empty() || cfg.woosh.samples.empty())
    throw Error("render_sweep: empty tap or woosh sound");

  const int sr = store.sample_rate();
  std::vector<double> left, right;
  SweepResult result;

  for (std::size_t s = 0; s < sectors.size(); ++s) {
    SonoEvent ev;
    ev.sector = static_cast<int>(s);
    ev.onset_s = static_cast<double>(s) * cfg.cadence_s;

    AudioBuffer source;
    BrirSelection sel;
    if (sectors[s].known) {
      ev.kind = SonoEvent::Kind::Tap;
      ev.azimuth_deg = static_cast<double>(sectors[s].bin_deg);
      ev.distance_m = map_distance(sectors[s].range_m, cfg.distance_scale);
      ev.semitones = pitch_class(ev.distance_m);
      sel = select_brir(store, ev.azimuth_deg, ev.distance_m);
      source = pitch_shift(cfg.tap, ev.semitones);
    } else {
      ev.kind = SonoEvent::Kind::Woosh;
      ev.azimuth_deg =
          static_cast<double>(s) * cfg.sector_deg + cfg.sector_deg / 2.0;
      ev.semitones = 0;
      sel = select_brir(store, ev.azimuth_deg, 4.0);
      source = cfg.woosh;
    }
    result.events.push_back(ev);

    const auto onset = static_cast<std::size_t>(
        std::llround(ev.onset_s * static_cast<double>(sr)));
    const auto ir_left = sel.ir->channel(0);
    const auto ir_right = sel.ir->channel(1);
    const auto conv_l = dsp::convolve_full(source.samples, ir_left);
    const auto conv_r = dsp::convolve_full(source.samples, ir_right);
    const std::size_t need = onset + conv_l.size();
    if (left.size() < need) {
      left.resize(need, 0.0);
      right.resize(need, 0.0);
    }
    for (std::size_t i = 0; i < conv_l.size(); ++i) {
      left[onset + i] += conv_l[i];
      right[onset + i] += conv_r[i];
    }
  }

  double peak = 0.0;
  for (std::size_t i = 0; i < left.size(); ++i)
    peak = std::max({peak, std::abs(left[i]), std::abs(right[i])});
  const double gain = peak > 1.0 ? 0.99 / peak : 1.0;

  result.audio.sample_rate = sr;
  result.audio.channels = 2;
  result.audio.samples.resize(left.size() * 2);
  for (std::size_t i = 0; i < left.size(); ++i) {
    result.audio.sample(0, i) = static_cast<float>(left[i] * gain);
    result.audio.sample(1, i) = static_cast<float>(right[i] * gain);
  }
  return result;
}

}  // namespace sonimap

#endif  // SONIMAP_SONIFIER_HPP
