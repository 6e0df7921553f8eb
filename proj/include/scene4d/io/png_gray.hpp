#pragma once

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "scene4d/error.hpp"

namespace scene4d {

/// Single-channel image, row-major top row first. Values fit the bit depth.
struct GrayImage {
  int width = 0;
  int height = 0;
  int bit_depth = 8;  // 8 or 16
  std::vector<uint16_t> values;

  uint16_t at(int x, int y) const { return values[y * width + x]; }
  uint16_t& at(int x, int y) { return values[y * width + x]; }
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

inline GrayImage read_png_gray(const std::string& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw MissingFile("png read: cannot open " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw CorruptHeader("png read: not a PNG file: " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png read: init failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png read: init failure");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw CorruptHeader("png read: decode failure in " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw CorruptHeader("png read: expected single-channel grayscale: " + path);
  }
  if (bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    bit_depth = 8;
  }
  png_read_update_info(png, info);

  GrayImage img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.bit_depth = bit_depth;
  img.values.resize(static_cast<size_t>(img.width) * img.height);

  const size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<png_byte> row(row_bytes);
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < img.width; ++x) {
      img.values[static_cast<size_t>(y) * img.width + x] =
          bit_depth == 16
              ? static_cast<uint16_t>((row[2 * x] << 8) | row[2 * x + 1])
              : row[x];
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void write_png_gray(const std::string& path, const GrayImage& img) {
  if (img.bit_depth != 8 && img.bit_depth != 16)
    throw Error("png write: bit depth must be 8 or 16");
  if (static_cast<int>(img.values.size()) != img.width * img.height)
    throw DimensionMismatch("png write: raster size mismatch: " + path);

  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("png write: cannot open " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png write: init failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png write: init failure");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png write: encode failure on " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, img.bit_depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const int bytes_per_px = img.bit_depth / 8;
  std::vector<png_byte> row(static_cast<size_t>(img.width) * bytes_per_px);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const uint16_t v = img.values[static_cast<size_t>(y) * img.width + x];
      if (img.bit_depth == 16) {
        row[2 * x] = static_cast<png_byte>(v >> 8);  // MSB first per PNG spec
        row[2 * x + 1] = static_cast<png_byte>(v & 0xff);
      } else {
        row[x] = static_cast<png_byte>(v & 0xff);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace scene4d
