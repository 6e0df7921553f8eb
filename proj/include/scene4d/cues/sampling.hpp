#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "scene4d/cues/cues.hpp"

namespace scene4d {

/// Bilinear depth sample at a subpixel coordinate (pixel centers at integer
/// positions, clamped at borders). Returns nullopt unless all four
/// contributing pixels are valid.
inline std::optional<double> sample_depth_bilinear(const DepthFrame& d,
                                                   const Eigen::Vector2d& px) {
  if (d.width < 2 || d.height < 2) return std::nullopt;
  const double xc = std::clamp(px.x(), 0.0, d.width - 1.0);
  const double yc = std::clamp(px.y(), 0.0, d.height - 1.0);
  const int x0 = std::min(static_cast<int>(std::floor(xc)), d.width - 2);
  const int y0 = std::min(static_cast<int>(std::floor(yc)), d.height - 2);
  const double ax = xc - x0;
  const double ay = yc - y0;
  if (!d.valid_at(x0, y0) || !d.valid_at(x0 + 1, y0) ||
      !d.valid_at(x0, y0 + 1) || !d.valid_at(x0 + 1, y0 + 1))
    return std::nullopt;
  const double top = (1 - ax) * d.at(x0, y0) + ax * d.at(x0 + 1, y0);
  const double bot = (1 - ax) * d.at(x0, y0 + 1) + ax * d.at(x0 + 1, y0 + 1);
  return (1 - ay) * top + ay * bot;
}

/// Bilinear sample over a plain float raster (no validity), same convention.
inline double sample_raster_bilinear(const float* values, int width,
                                     int height, const Eigen::Vector2d& px) {
  const double xc = std::clamp(px.x(), 0.0, width - 1.0);
  const double yc = std::clamp(px.y(), 0.0, height - 1.0);
  const int x0 = std::min(static_cast<int>(std::floor(xc)), width - 2);
  const int y0 = std::min(static_cast<int>(std::floor(yc)), height - 2);
  const double ax = xc - x0;
  const double ay = yc - y0;
  const auto at = [&](int x, int y) {
    return static_cast<double>(values[y * width + x]);
  };
  const double top = (1 - ax) * at(x0, y0) + ax * at(x0 + 1, y0);
  const double bot = (1 - ax) * at(x0, y0 + 1) + ax * at(x0 + 1, y0 + 1);
  return (1 - ay) * top + ay * bot;
}

}  // namespace scene4d
