// sonimap - PLY point cloud reader/writer (ascii and binary_little_endian)
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_IO_PLY_HPP
#define SONIMAP_IO_PLY_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sonimap/error.hpp"
#include "sonimap/geometry.hpp"
#include "sonimap/io/wav.hpp"  // detail::read_file_bytes

namespace sonimap::io {

namespace detail {

inline std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
      t == "float" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  return 0;
}

struct PlyProperty {
  std::string type;
  std::string name;
  std::size_t offset = 0;  // byte offset within a binary row
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
  std::size_t row_size = 0;
};

}  // namespace detail

/// Reads float32 x/y/z vertices. Extra per-vertex properties are skipped.
/// Non-finite vertices are dropped; the drop count is reported through
/// `dropped` when non-null. The returned cloud is tagged Frame::Sensor.
inline PointCloud parse_ply(const std::string& path,
                            std::size_t* dropped = nullptr) {
  const auto bytes = detail::read_file_bytes(path);
  if (dropped) *dropped = 0;

  // --- header ---
  std::size_t pos = 0, line_no = 0;
  auto next_line = [&]() -> std::string {
    if (pos >= bytes.size())
      throw ParseError(path, line_no, "unexpected end of file");
    std::size_t end = pos;
    while (end < bytes.size() && bytes[end] != '\n') ++end;
    std::string line(reinterpret_cast<const char*>(bytes.data() + pos),
                     end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end < bytes.size() ? end + 1 : end;
    ++line_no;
    return line;
  };

  if (next_line() != "ply") throw ParseError(path, 1, "missing 'ply' magic");

  bool binary = false;
  bool have_format = false;
  std::vector<detail::PlyElement> elements;

  for (;;) {
    const std::string line = next_line();
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
    if (kw == "format") {
      std::string fmt, version;
      ss >> fmt >> version;
      if (version != "1.0")
        throw ParseError(path, line_no, "unsupported PLY version '" + version + "'");
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else throw ParseError(path, line_no, "unsupported format '" + fmt + "'");
      have_format = true;
    } else if (kw == "element") {
      detail::PlyElement el;
      long long count = -1;
      ss >> el.name >> count;
      if (el.name.empty() || count < 0)
        throw ParseError(path, line_no, "malformed element declaration");
      el.count = static_cast<std::size_t>(count);
      elements.push_back(el);
    } else if (kw == "property") {
      if (elements.empty())
        throw ParseError(path, line_no, "property before any element");
      detail::PlyProperty prop;
      ss >> prop.type;
      if (prop.type == "list") {
        // Variable-length rows cannot be skipped reliably; reject up front.
        throw ParseError(path, line_no, "list properties are not supported");
      }
      ss >> prop.name;
      const std::size_t sz = detail::ply_type_size(prop.type);
      if (sz == 0 || prop.name.empty())
        throw ParseError(path, line_no, "malformed property declaration");
      prop.offset = elements.back().row_size;
      elements.back().row_size += sz;
      elements.back().properties.push_back(prop);
    } else if (kw == "end_header") {
      break;
    } else {
      throw ParseError(path, line_no, "unknown header keyword '" + kw + "'");
    }
  }
  if (!have_format) throw ParseError(path, line_no, "missing format line");

  const detail::PlyElement* vertex = nullptr;
  std::size_t vertex_idx = 0;
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (elements[i].name == "vertex") {
      vertex = &elements[i];
      vertex_idx = i;
      break;
    }
  if (!vertex) throw ParseError(path, 0, "no 'vertex' element");

  std::ptrdiff_t off_x = -1, off_y = -1, off_z = -1;
  std::size_t col_x = 0, col_y = 0, col_z = 0;
  for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
    const auto& prop = vertex->properties[i];
    if (prop.name == "x" || prop.name == "y" || prop.name == "z") {
      if (prop.type != "float" && prop.type != "float32")
        throw ParseError(path, 0, "property '" + prop.name +
                                      "' must be float32, got " + prop.type);
      if (prop.name == "x") { off_x = static_cast<std::ptrdiff_t>(prop.offset); col_x = i; }
      if (prop.name == "y") { off_y = static_cast<std::ptrdiff_t>(prop.offset); col_y = i; }
      if (prop.name == "z") { off_z = static_cast<std::ptrdiff_t>(prop.offset); col_z = i; }
    }
  }
  if (off_x < 0 || off_y < 0 || off_z < 0)
    throw ParseError(path, 0, "vertex element lacks float x/y/z properties");

  PointCloud cloud;
  cloud.frame = Frame::Sensor;
  cloud.points.reserve(std::min<std::size_t>(vertex->count, 1u << 20));
  std::size_t drop_count = 0;

  auto push_point = [&](float x, float y, float z) {
    if (std::isfinite(x) && std::isfinite(y) && std::isfinite(z))
      cloud.points.emplace_back(x, y, z);
    else
      ++drop_count;
  };

  if (binary) {
    // Skip elements declared before vertex, then read the vertex rows.
    // Count-times-rowsize products are checked by division to dodge overflow
    // on hostile headers.
    std::size_t offset = pos;
    for (std::size_t i = 0; i < vertex_idx; ++i) {
      const std::size_t avail = bytes.size() - offset;
      if (elements[i].row_size != 0 &&
          elements[i].count > avail / elements[i].row_size)
        throw TruncationError(path, 0,
                              "element '" + elements[i].name + "' truncated");
      offset += elements[i].count * elements[i].row_size;
    }
    const std::size_t avail = bytes.size() - offset;
    if (vertex->row_size == 0)
      throw ParseError(path, 0, "vertex element has zero-size rows");
    if (vertex->count > avail / vertex->row_size)
      throw TruncationError(
          path, 0,
          "vertex payload truncated: expected " +
              std::to_string(vertex->count * vertex->row_size) +
              " bytes, found " + std::to_string(avail));
    const std::uint8_t* row = bytes.data() + offset;
    for (std::size_t i = 0; i < vertex->count; ++i, row += vertex->row_size) {
      float x, y, z;
      std::memcpy(&x, row + off_x, 4);
      std::memcpy(&y, row + off_y, 4);
      std::memcpy(&z, row + off_z, 4);
      push_point(x, y, z);
    }
  } else {
    // Ascii: one element per line, whitespace separated.
    const std::size_t ncols = vertex->properties.size();
    for (std::size_t i = 0; i < vertex_idx; ++i)
      for (std::size_t k = 0; k < elements[i].count; ++k) next_line();
    for (std::size_t i = 0; i < vertex->count; ++i) {
      if (pos >= bytes.size())
        throw TruncationError(path, line_no,
                              "vertex rows truncated: expected " +
                                  std::to_string(vertex->count) + ", found " +
                                  std::to_string(i));
      const std::string line = next_line();
      std::istringstream ss(line);
      std::vector<double> vals;
      double v;
      while (ss >> v) vals.push_back(v);
      if (vals.size() != ncols)
        throw ParseError(path, line_no,
                         "expected " + std::to_string(ncols) +
                             " values, got " + std::to_string(vals.size()));
      push_point(static_cast<float>(vals[col_x]),
                 static_cast<float>(vals[col_y]),
                 static_cast<float>(vals[col_z]));
    }
  }

  if (dropped) *dropped = drop_count;
  return cloud;
}

/// Writes x/y/z float32 vertices, binary_little_endian by default.
inline void write_ply(const std::string& path, const std::vector<Vec3>& points,
                      bool binary = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_ply: cannot open " + path);
  out << "ply\n"
      << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n")
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "end_header\n";
  if (binary) {
    for (const Vec3& p : points) {
      const float row[3] = {static_cast<float>(p.x()),
                            static_cast<float>(p.y()),
                            static_cast<float>(p.z())};
      out.write(reinterpret_cast<const char*>(row), sizeof(row));
    }
  } else {
    char buf[128];
    for (const Vec3& p : points) {
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n",
                    static_cast<float>(p.x()), static_cast<float>(p.y()),
                    static_cast<float>(p.z()));
      out << buf;
    }
  }
  if (!out) throw Error("write_ply: write failed for " + path);
}

}  // namespace sonimap::io

#endif  // SONIMAP_IO_PLY_HPP
