#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/error.hpp"

namespace scene4d {

static_assert(std::endian::native == std::endian::little,
              "PLY writer assumes a little-endian host");

using Rgb = std::array<uint8_t, 3>;

/// Binary little-endian PLY with x/y/z float32 and red/green/blue uint8.
inline void write_ply(const std::string& path,
                      const std::vector<Eigen::Vector3f>& points,
                      const std::vector<Rgb>& colors) {
  if (points.size() != colors.size())
    throw LengthMismatch("ply write: points vs colors: " + path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("ply write: cannot open " + path);
  out << "ply\n"
      << "format binary_little_endian 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "property uchar red\n"
      << "property uchar green\n"
      << "property uchar blue\n"
      << "end_header\n";
  for (size_t i = 0; i < points.size(); ++i) {
    const float xyz[3] = {points[i].x(), points[i].y(), points[i].z()};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    out.write(reinterpret_cast<const char*>(colors[i].data()), 3);
  }
  if (!out) throw Error("ply write: short write on " + path);
}

struct PlyCloud {
  std::vector<Eigen::Vector3f> points;
  std::vector<Rgb> colors;
};

/// Reads the exact layout write_ply emits. Anything else in the header is a
/// CorruptHeader; a truncated body is an Error.
inline PlyCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("ply read: cannot open " + path);
  auto next_line = [&]() {
    std::string line;
    if (!std::getline(in, line))
      throw CorruptHeader("ply read: truncated header: " + path);
    return line;
  };
  if (next_line() != "ply") throw CorruptHeader("ply read: bad magic: " + path);
  if (next_line() != "format binary_little_endian 1.0")
    throw CorruptHeader("ply read: unsupported format: " + path);
  std::string line = next_line();
  size_t count = 0;
  if (line.rfind("element vertex ", 0) != 0 ||
      sscanf(line.c_str() + 15, "%zu", &count) != 1)
    throw CorruptHeader("ply read: missing vertex element: " + path);
  static const char* kProps[6] = {"property float x",     "property float y",
                                  "property float z",     "property uchar red",
                                  "property uchar green", "property uchar blue"};
  for (const char* prop : kProps)
    if (next_line() != prop)
      throw CorruptHeader("ply read: unexpected property order: " + path);
  if (next_line() != "end_header")
    throw CorruptHeader("ply read: missing end_header: " + path);

  PlyCloud cloud;
  cloud.points.resize(count);
  cloud.colors.resize(count);
  for (size_t i = 0; i < count; ++i) {
    float xyz[3];
    in.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
    in.read(reinterpret_cast<char*>(cloud.colors[i].data()), 3);
    if (!in) throw Error("ply read: truncated body: " + path);
    cloud.points[i] = Eigen::Vector3f(xyz[0], xyz[1], xyz[2]);
  }
  return cloud;
}

}  // namespace scene4d
