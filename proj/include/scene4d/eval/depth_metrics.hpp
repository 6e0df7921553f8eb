#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/cues/cues.hpp"
#include "scene4d/error.hpp"

namespace scene4d {

enum class DepthAlignMode { kScaleShift, kScale };

struct AlignedDepth {
  std::vector<DepthFrame> frames;
  // disparity-space coefficients: aligned = 1 / (a/pred + b). In scale mode
  // aligned = a * pred and b stays 0.
  double a = 1.0;
  double b = 0.0;
};

namespace detail {

template <typename Fn>
void for_each_valid_pair(const std::vector<DepthFrame>& pred,
                         const std::vector<DepthFrame>& gt, Fn&& fn) {
  if (pred.size() != gt.size())
    throw LengthMismatch("depth sequences: " + std::to_string(pred.size()) +
                         " vs " + std::to_string(gt.size()) + " frames");
  for (size_t f = 0; f < pred.size(); ++f) {
    if (pred[f].width != gt[f].width || pred[f].height != gt[f].height)
      throw DimensionMismatch("depth frame " + std::to_string(f) +
                              ": raster sizes differ");
    const size_t n = pred[f].values.size();
    for (size_t i = 0; i < n; ++i)
      if (pred[f].validity[i] && gt[f].validity[i])
        fn(double(pred[f].values[i]), double(gt[f].values[i]));
  }
}

}  // namespace detail

/// Aligns a predicted depth sequence to ground truth with one global
/// correction for the whole sequence: either scale and shift in disparity
/// space (least squares on inverse depth) or a single scale in depth space.
inline AlignedDepth align_depth(const std::vector<DepthFrame>& pred,
                                const std::vector<DepthFrame>& gt,
                                DepthAlignMode mode) {
  AlignedDepth out;
  if (mode == DepthAlignMode::kScale) {
    double num = 0.0, den = 0.0;
    size_t count = 0;
    detail::for_each_valid_pair(pred, gt, [&](double p, double g) {
      num += p * g;
      den += p * p;
      ++count;
    });
    if (count < 2) throw InsufficientOverlap("align_depth: fewer than 2 valid pixel pairs");
    if (!(den > 0)) throw InsufficientOverlap("align_depth: zero predicted depth energy");
    out.a = num / den;
    out.b = 0.0;
  } else {
    // normal equations for disparity-space a*x + b ≈ y with x=1/pred, y=1/gt
    double sxx = 0.0, sx = 0.0, sxy = 0.0, sy = 0.0;
    size_t count = 0;
    detail::for_each_valid_pair(pred, gt, [&](double p, double g) {
      const double x = 1.0 / p;
      const double y = 1.0 / g;
      sxx += x * x;
      sx += x;
      sxy += x * y;
      sy += y;
      ++count;
    });
    if (count < 2) throw InsufficientOverlap("align_depth: fewer than 2 valid pixel pairs");
    const double n = double(count);
    const double det = sxx * n - sx * sx;
    if (std::abs(det) <= 1e-14 * std::max(1.0, sxx * n))
      throw InsufficientOverlap("align_depth: degenerate disparity distribution");
    out.a = (sxy * n - sx * sy) / det;
    out.b = (sxx * sy - sx * sxy) / det;
  }

  out.frames = pred;
  for (DepthFrame& frame : out.frames) {
    for (size_t i = 0; i < frame.values.size(); ++i) {
      if (!frame.validity[i]) continue;
      double v;
      if (mode == DepthAlignMode::kScale) {
        v = out.a * double(frame.values[i]);
      } else {
        const double disp = out.a / double(frame.values[i]) + out.b;
        v = disp > 0 ? 1.0 / disp : -1.0;
      }
      if (v > 0 && std::isfinite(v)) {
        frame.values[i] = float(v);
      } else {
        frame.values[i] = -1.0f;
        frame.validity[i] = 0;
      }
    }
  }
  return out;
}

struct DepthMetrics {
  double abs_rel = 0.0;
  double delta_125 = 0.0;  // percentage
};

/// AbsRel and the δ<1.25 inlier percentage over jointly valid pixels.
inline DepthMetrics depth_metrics(const std::vector<DepthFrame>& pred,
                                  const std::vector<DepthFrame>& gt) {
  double rel_sum = 0.0;
  size_t count = 0, inliers = 0;
  detail::for_each_valid_pair(pred, gt, [&](double p, double g) {
    rel_sum += std::abs(p - g) / g;
    if (std::max(p / g, g / p) < 1.25) ++inliers;
    ++count;
  });
  DepthMetrics m;
  if (count > 0) {
    m.abs_rel = rel_sum / double(count);
    m.delta_125 = 100.0 * double(inliers) / double(count);
  }
  return m;
}

}  // namespace scene4d
