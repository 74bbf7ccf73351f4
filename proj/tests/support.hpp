// sonimap - shared test helpers
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_TESTS_SUPPORT_HPP
#define SONIMAP_TESTS_SUPPORT_HPP

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sonimap/geometry.hpp"

namespace testsupport {

/// Unique temp directory removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      auto candidate = base / ("sonimap-" + tag + "-" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directories(candidate, ec)) {
        path_ = candidate;
        break;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

private:
  std::filesystem::path path_;
};

inline sonimap::Quat yaw_quat(double yaw_deg) {
  return sonimap::Quat(
      Eigen::AngleAxisd(sonimap::deg2rad(yaw_deg), sonimap::Vec3::UnitZ()));
}

/// Dense point samples of an axis-aligned wall patch x = const.
inline std::vector<sonimap::Vec3> sample_wall_x(double x, double y0, double y1,
                                                double z0, double z1,
                                                double step) {
  std::vector<sonimap::Vec3> pts;
  for (double y = y0; y <= y1 + 1e-12; y += step)
    for (double z = z0; z <= z1 + 1e-12; z += step)
      pts.emplace_back(x, y, z);
  return pts;
}

inline std::mt19937_64 seeded_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

inline std::string cli_path() {
  const char* env = std::getenv("SONIMAP_CLI");
  return env ? env : "";
}

}  // namespace testsupport

#endif  // SONIMAP_TESTS_SUPPORT_HPP
