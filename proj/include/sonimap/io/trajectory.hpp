// sonimap - TUM-style trajectory files
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_IO_TRAJECTORY_HPP
#define SONIMAP_IO_TRAJECTORY_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sonimap/error.hpp"
#include "sonimap/geometry.hpp"

namespace sonimap::io {

struct TrajectoryRecord {
  double timestamp = 0.0;  // seconds
  Pose pose;
};

/// Parses `timestamp tx ty tz qx qy qz qw` records, one per line, with `#`
/// comments and blank lines allowed. Quaternions are normalized after a
/// sanity check (|q| must lie in [0.9, 1.1]); timestamps must be strictly
/// increasing.
inline std::vector<TrajectoryRecord> parse_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");

  std::vector<TrajectoryRecord> records;
  std::string line;
  std::size_t line_no = 0;
  double prev_ts = 0.0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);

    std::istringstream ss(line);
    std::vector<double> fields;
    double v;
    while (ss >> v) fields.push_back(v);
    if (!ss.eof()) {
      std::string junk;
      ss.clear();
      if (ss >> junk && !junk.empty())
        throw ParseError(path, line_no, "non-numeric field '" + junk + "'");
    }
    if (fields.empty()) continue;
    if (fields.size() != 8)
      throw ParseError(path, line_no,
                       "expected 8 fields (timestamp tx ty tz qx qy qz qw), got " +
                           std::to_string(fields.size()));
    for (double f : fields)
      if (!std::isfinite(f))
        throw ParseError(path, line_no, "non-finite field value");

    if (!records.empty() && fields[0] <= prev_ts)
      throw MonotonicityError(
          path, line_no,
          "timestamps not strictly increasing (" + std::to_string(fields[0]) +
              " after " + std::to_string(prev_ts) + ")");
    prev_ts = fields[0];

    const Quat q(fields[7], fields[4], fields[5], fields[6]);  // (w, x, y, z)
    const double qn = q.norm();
    if (qn < 0.9 || qn > 1.1)
      throw ParseError(path, line_no,
                       "quaternion norm " + std::to_string(qn) +
                           " outside [0.9, 1.1]");

    TrajectoryRecord rec;
    rec.timestamp = fields[0];
    rec.pose = Pose(Vec3(fields[1], fields[2], fields[3]), q);
    records.push_back(rec);
  }
  return records;
}

inline void write_trajectory(const std::string& path,
                             const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error("write_trajectory: cannot open " + path);
  out << "# timestamp tx ty tz qx qy qz qw\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n",
                  r.timestamp, r.pose.t.x(), r.pose.t.y(), r.pose.t.z(),
                  r.pose.q.x(), r.pose.q.y(), r.pose.q.z(), r.pose.q.w());
    out << buf;
  }
  if (!out) throw Error("write_trajectory: write failed for " + path);
}

}  // namespace sonimap::io

#endif  // SONIMAP_IO_TRAJECTORY_HPP
