// sonimap - JSON manifest for BRIR datasets (grid of WAV responses)
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_IO_BRIR_MANIFEST_HPP
#define SONIMAP_IO_BRIR_MANIFEST_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "sonimap/brir.hpp"
#include "sonimap/error.hpp"
#include "sonimap/io/wav.hpp"

namespace sonimap::io {

/// Loads `{"sample_rate": .., "convention": {..}, "entries": [{"azimuth_deg":
/// .., "distance_m": .., "wav": ..} ...]}`. Entries may alternatively carry
/// "left_wav"/"right_wav" mono pairs. WAV paths are relative to the manifest.
/// With `require_full_grid` the full 120 x 10 recording grid must be present.
inline BrirStore parse_brir_manifest(const std::string& path,
                                     bool require_full_grid = false) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }

  try {
    if (!doc.is_object() || !doc.contains("sample_rate") ||
        !doc.contains("entries"))
      throw ParseError(path, 0, "manifest needs sample_rate and entries");
    const int sample_rate = doc.at("sample_rate").get<int>();
    if (sample_rate <= 0) throw ParseError(path, 0, "bad sample_rate");

    BrirStore store(sample_rate);
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& rel) {
      const std::filesystem::path p(rel);
      return p.is_absolute() ? p.string() : (base / p).string();
    };

    for (const auto& entry : doc.at("entries")) {
      const double az = entry.at("azimuth_deg").get<double>();
      const double dist = entry.at("distance_m").get<double>();
      AudioBuffer ir;
      if (entry.contains("wav")) {
        ir = read_wav(resolve(entry.at("wav").get<std::string>()));
        if (ir.channels != 2)
          throw ParseError(path, 0,
                           "entry (" + std::to_string(az) + ", " +
                               std::to_string(dist) + "): wav must be stereo");
      } else if (entry.contains("left_wav") && entry.contains("right_wav")) {
        const AudioBuffer l = read_wav(resolve(entry.at("left_wav").get<std::string>()));
        const AudioBuffer r = read_wav(resolve(entry.at("right_wav").get<std::string>()));
        if (l.channels != 1 || r.channels != 1 ||
            l.sample_rate != r.sample_rate || l.frames() != r.frames())
          throw ParseError(path, 0,
                           "entry (" + std::to_string(az) + ", " +
                               std::to_string(dist) +
                               "): left/right pair must be matching mono files");
        ir.sample_rate = l.sample_rate;
        ir.channels = 2;
        ir.samples.resize(l.frames() * 2);
        for (std::size_t i = 0; i < l.frames(); ++i) {
          ir.sample(0, i) = l.samples[i];
          ir.sample(1, i) = r.samples[i];
        }
      } else {
        throw ParseError(path, 0,
                         "entry (" + std::to_string(az) + ", " +
                             std::to_string(dist) +
                             "): needs wav or left_wav/right_wav");
      }
      if (ir.sample_rate != sample_rate)
        throw ParseError(path, 0,
                         "entry (" + std::to_string(az) + ", " +
                             std::to_string(dist) + "): sample rate " +
                             std::to_string(ir.sample_rate) +
                             " Hz does not match manifest " +
                             std::to_string(sample_rate) + " Hz");
      store.add(az, dist, std::move(ir), path);
    }

    if (require_full_grid) store.validate_full_grid();
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, std::string("malformed manifest: ") + e.what());
  }
}

/// Writes a manifest plus one stereo WAV per grid entry; used by the
/// brir-gen tool and the test fixtures.
inline void write_brir_dataset(const std::string& dir, const BrirStore& store,
                               bool full_grid = true) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json doc;
  doc["sample_rate"] = store.sample_rate();
  doc["convention"] = {{"azimuth_zero", "front"}, {"positive", "ccw"}};
  doc["entries"] = nlohmann::json::array();
  if (!full_grid) throw Error("write_brir_dataset: only full grids supported");
  char name[64];
  for (int a = 0; a < BrirStore::kAzimuthCount; ++a)
    for (int d = 0; d < BrirStore::kDistanceCount; ++d) {
      const double az = BrirStore::grid_azimuth_deg(a);
      const double dist = BrirStore::grid_distance_m(d);
      std::snprintf(name, sizeof(name), "brir_az%+04d_d%02d.wav",
                    static_cast<int>(az), static_cast<int>(dist * 10));
      write_wav((fs::path(dir) / name).string(), store.get(az, dist));
      doc["entries"].push_back({{"azimuth_deg", az},
                                {"distance_m", dist},
                                {"wav", std::string(name)}});
    }
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw Error("write_brir_dataset: cannot write manifest");
  out << doc.dump(1) << '\n';
}

}  // namespace sonimap::io

#endif  // SONIMAP_IO_BRIR_MANIFEST_HPP
