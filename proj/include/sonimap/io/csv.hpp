// sonimap - CSV schemas for rasters, metrics, events, and map dumps
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_IO_CSV_HPP
#define SONIMAP_IO_CSV_HPP

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sonimap/error.hpp"
#include "sonimap/raster.hpp"
#include "sonimap/voxel_map.hpp"

namespace sonimap::io {

namespace detail {

/// Shortest round-trip decimal formatting; keeps the CSV files byte-stable.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_csv_double(const std::string& s, const std::string& path,
                               std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(path, line_no, "bad numeric field '" + s + "'");
  return v;
}

inline long parse_csv_long(const std::string& s, const std::string& path,
                           std::size_t line_no) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(path, line_no, "bad integer field '" + s + "'");
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace detail

// --- circle -----------------------------------------------------------

/// `angle_deg,range_m,known`, one row per bin; unknown bins leave range empty.
inline void write_circle_csv(const std::string& path,
                             const CircularRaster& raster) {
  std::ofstream out(path);
  if (!out) throw Error("write_circle_csv: cannot open " + path);
  out << "angle_deg,range_m,known\n";
  for (int b = 0; b < CircularRaster::kBins; ++b) {
    out << b << ',';
    if (raster.is_known(b)) out << detail::format_double(raster.range[b]);
    out << ',' << (raster.is_known(b) ? 1 : 0) << '\n';
  }
  if (!out) throw Error("write_circle_csv: write failed for " + path);
}

/// Reads a circle CSV back. Center and heading are not part of the file
/// format; the result carries the defaults.
inline CircularRaster read_circle_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || detail::split_csv_line(lines[0]).size() != 3)
    throw ParseError(path, 1, "missing circle CSV header");
  CircularRaster raster;
  std::size_t rows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = detail::split_csv_line(lines[i]);
    if (f.size() != 3)
      throw ParseError(path, i + 1, "expected 3 fields, got " +
                                        std::to_string(f.size()));
    const long bin = detail::parse_csv_long(f[0], path, i + 1);
    if (bin < 0 || bin >= CircularRaster::kBins)
      throw ParseError(path, i + 1, "bin out of range");
    const long known = detail::parse_csv_long(f[2], path, i + 1);
    if (known != 0 && known != 1)
      throw ParseError(path, i + 1, "known flag must be 0 or 1");
    if (known) {
      raster.range[bin] = detail::parse_csv_double(f[1], path, i + 1);
      raster.known[bin] = 1;
    } else if (!f[1].empty()) {
      throw ParseError(path, i + 1, "unknown bin carries a range");
    }
    ++rows;
  }
  if (rows != CircularRaster::kBins)
    throw ParseError(path, lines.size(),
                     "expected 360 data rows, got " + std::to_string(rows));
  return raster;
}

// --- cylinder ---------------------------------------------------------

/// `angle_deg,elevation_m,range_m,known`; elevation is the row center.
inline void write_cylinder_csv(const std::string& path,
                               const CylindricalRaster& raster) {
  std::ofstream out(path);
  if (!out) throw Error("write_cylinder_csv: cannot open " + path);
  out << "angle_deg,elevation_m,range_m,known\n";
  for (int col = 0; col < CylindricalRaster::kColumns; ++col)
    for (int row = 0; row < raster.rows; ++row) {
      out << col << ','
          << detail::format_double(raster.row_center_elevation(row)) << ',';
      if (raster.is_known(col, row))
        out << detail::format_double(raster.range[raster.idx(col, row)]);
      out << ',' << (raster.is_known(col, row) ? 1 : 0) << '\n';
    }
  if (!out) throw Error("write_cylinder_csv: write failed for " + path);
}

inline CylindricalRaster read_cylinder_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || detail::split_csv_line(lines[0]).size() != 4)
    throw ParseError(path, 1, "missing cylinder CSV header");

  std::size_t data_rows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i)
    if (!lines[i].empty()) ++data_rows;
  if (data_rows == 0 || data_rows % CylindricalRaster::kColumns != 0)
    throw ParseError(path, lines.size(),
                     "row count is not a multiple of 360");
  const int rows = static_cast<int>(data_rows / CylindricalRaster::kColumns);

  CylindricalRaster raster;
  raster.rows = rows;
  raster.resize();

  double first_elev = 0.0, second_elev = 0.0;
  int seen = 0;
  std::size_t cursor = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = detail::split_csv_line(lines[i]);
    if (f.size() != 4)
      throw ParseError(path, i + 1, "expected 4 fields, got " +
                                        std::to_string(f.size()));
    const long col = detail::parse_csv_long(f[0], path, i + 1);
    const double elev = detail::parse_csv_double(f[1], path, i + 1);
    const long known = detail::parse_csv_long(f[3], path, i + 1);
    const long row = static_cast<long>(cursor % rows);
    const long expect_col = static_cast<long>(cursor / rows);
    if (col != expect_col)
      throw ParseError(path, i + 1, "unexpected angle ordering");
    if (known != 0 && known != 1)
      throw ParseError(path, i + 1, "known flag must be 0 or 1");
    if (known) {
      raster.range[raster.idx(static_cast<int>(col), static_cast<int>(row))] =
          detail::parse_csv_double(f[2], path, i + 1);
      raster.known[raster.idx(static_cast<int>(col), static_cast<int>(row))] = 1;
    }
    if (seen == 0) { first_elev = elev; ++seen; }
    else if (seen == 1 && row == 1) { second_elev = elev; ++seen; }
    ++cursor;
  }
  if (seen == 2) {
    raster.row_height = second_elev - first_elev;
    raster.elev_min = first_elev - raster.row_height * 0.5;
  } else {
    raster.row_height = 0.0;
    raster.elev_min = first_elev;
  }
  return raster;
}

// --- metrics ----------------------------------------------------------

struct MetricsRow {
  long frame_index = 0;
  std::optional<double> rmse_m;
  std::optional<double> coverage_fraction;
  double elapsed_ms = 0.0;
};

/// `frame_index,rmse_m,coverage_fraction,elapsed_ms`; absent metrics write
/// empty fields.
inline void write_metrics_csv(const std::string& path,
                              const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("write_metrics_csv: cannot open " + path);
  out << "frame_index,rmse_m,coverage_fraction,elapsed_ms\n";
  for (const auto& r : rows) {
    out << r.frame_index << ',';
    if (r.rmse_m) out << detail::format_double(*r.rmse_m);
    out << ',';
    if (r.coverage_fraction) out << detail::format_double(*r.coverage_fraction);
    out << ',' << detail::format_double(r.elapsed_ms) << '\n';
  }
  if (!out) throw Error("write_metrics_csv: write failed for " + path);
}

// --- sonification events ----------------------------------------------

struct EventRow {
  double onset_s = 0.0;
  int sector = 0;
  std::string kind;  // "tap" | "woosh"
  double azimuth_deg = 0.0;
  std::optional<double> distance_m;  // absent for woosh
  int semitones = 0;
};

inline void write_events_csv(const std::string& path,
                             const std::vector<EventRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("write_events_csv: cannot open " + path);
  out << "onset_s,sector,kind,azimuth_deg,distance_m,semitones\n";
  for (const auto& r : rows) {
    out << detail::format_double(r.onset_s) << ',' << r.sector << ','
        << r.kind << ',' << detail::format_double(r.azimuth_deg) << ',';
    if (r.distance_m) out << detail::format_double(*r.distance_m);
    out << ',' << r.semitones << '\n';
  }
  if (!out) throw Error("write_events_csv: write failed for " + path);
}

inline std::vector<EventRow> read_events_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ParseError(path, 1, "missing events CSV header");
  std::vector<EventRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = detail::split_csv_line(lines[i]);
    if (f.size() != 6)
      throw ParseError(path, i + 1, "expected 6 fields, got " +
                                        std::to_string(f.size()));
    EventRow r;
    r.onset_s = detail::parse_csv_double(f[0], path, i + 1);
    r.sector = static_cast<int>(detail::parse_csv_long(f[1], path, i + 1));
    r.kind = f[2];
    r.azimuth_deg = detail::parse_csv_double(f[3], path, i + 1);
    if (!f[4].empty()) r.distance_m = detail::parse_csv_double(f[4], path, i + 1);
    r.semitones = static_cast<int>(detail::parse_csv_long(f[5], path, i + 1));
    rows.push_back(r);
  }
  return rows;
}

// --- debug map dump ----------------------------------------------------

/// `ix,iy,iz,sdf,weight` in ascending index order.
inline void write_map_dump(const std::string& path, const SparseVoxelMap& map) {
  std::ofstream out(path);
  if (!out) throw Error("write_map_dump: cannot open " + path);
  out << "ix,iy,iz,sdf,weight\n";
  map.for_each_cell([&](const VoxelIndex& v, const VoxelCell& c) {
    out << v.x << ',' << v.y << ',' << v.z << ','
        << detail::format_double(c.sdf) << ','
        << detail::format_double(c.weight) << '\n';
  });
  if (!out) throw Error("write_map_dump: write failed for " + path);
}

}  // namespace sonimap::io

#endif  // SONIMAP_IO_CSV_HPP
