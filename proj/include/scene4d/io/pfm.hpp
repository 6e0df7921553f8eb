#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "scene4d/error.hpp"

namespace scene4d {

static_assert(std::endian::native == std::endian::little,
              "PFM writer assumes a little-endian host");

/// Grayscale float raster, row-major with the TOP row first. PFM stores rows
/// bottom-up, so readers/writers flip vertically.
struct PfmImage {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  float at(int x, int y) const { return values[y * width + x]; }
  float& at(int x, int y) { return values[y * width + x]; }
};

inline void write_pfm(const std::string& path, const PfmImage& img) {
  if (static_cast<int>(img.values.size()) != img.width * img.height)
    throw DimensionMismatch("pfm write: raster size mismatch: " + path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("pfm write: cannot open " + path);
  out << "Pf\n" << img.width << " " << img.height << "\n-1.0\n";
  for (int y = img.height - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(&img.values[y * img.width]),
              static_cast<std::streamsize>(img.width) * sizeof(float));
  }
  if (!out) throw Error("pfm write: short write on " + path);
}

inline PfmImage read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("pfm read: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic == "PF")
    throw CorruptHeader("pfm read: color PFM not supported: " + path);
  if (magic != "Pf") throw CorruptHeader("pfm read: bad magic in " + path);
  int width = 0, height = 0;
  double scale = 0;
  in >> width >> height >> scale;
  if (!in || width <= 0 || height <= 0 || scale == 0)
    throw CorruptHeader("pfm read: bad header in " + path);
  in.get();  // single whitespace byte before the raster
  PfmImage img;
  img.width = width;
  img.height = height;
  img.values.resize(static_cast<size_t>(width) * height);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(&img.values[y * static_cast<size_t>(width)]),
            static_cast<std::streamsize>(width) * sizeof(float));
  }
  if (!in) throw CorruptHeader("pfm read: truncated raster in " + path);
  if (scale > 0) {  // big-endian payload
    for (float& v : img.values) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      bits = __builtin_bswap32(bits);
      std::memcpy(&v, &bits, 4);
    }
  }
  return img;
}

}  // namespace scene4d
