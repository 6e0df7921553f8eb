#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/cues/cues.hpp"
#include "scene4d/cues/sampling.hpp"
#include "scene4d/error.hpp"
#include "scene4d/geometry/camera.hpp"
#include "scene4d/geometry/trajectory.hpp"

namespace scene4d {

struct SelfConsistencyResult {
  double sc = 0.0;
  std::vector<double> inlier_pct;  // one entry per threshold, in percent
  size_t samples = 0;
};

/// Cross-frame depth consistency over static regions. For every consecutive
/// frame pair, static valid pixels of the earlier frame are unprojected,
/// moved into the later camera, and their depth is compared against the later
/// frame's depth map sampled bilinearly at the landing pixel. Landing pixels
/// that fall outside the image, on invalid depth, or on non-static mask
/// labels are skipped. An empty `masks` vector treats every pixel as static.
inline SelfConsistencyResult self_consistency(
    const std::vector<DepthFrame>& depth, const Trajectory& trajectory,
    const std::vector<MaskFrame>& masks,
    const std::vector<double>& thresholds = {0.01, 0.05}) {
  if (depth.size() != trajectory.poses.size())
    throw LengthMismatch("self_consistency: " + std::to_string(depth.size()) +
                         " depth frames vs " +
                         std::to_string(trajectory.poses.size()) + " poses");
  if (!masks.empty() && masks.size() != depth.size())
    throw LengthMismatch("self_consistency: mask count mismatch");

  const Intrinsics& k = trajectory.intrinsics;
  auto is_static = [&](size_t frame, int x, int y) {
    if (masks.empty()) return true;
    return masks[frame].at(x, y) == 0;
  };

  double err_sum = 0.0;
  std::vector<size_t> inliers(thresholds.size(), 0);
  size_t samples = 0;

  for (size_t t = 0; t + 1 < depth.size(); ++t) {
    const DepthFrame& src = depth[t];
    const DepthFrame& dst = depth[t + 1];
    const Pose motion = frame_motion(trajectory.poses[t], trajectory.poses[t + 1]);
    const Eigen::Matrix3d rot = motion.rotation();
    for (int y = 0; y < src.height; ++y) {
      for (int x = 0; x < src.width; ++x) {
        if (!src.valid_at(x, y) || !is_static(t, x, y)) continue;
        const Eigen::Vector3d cam_pt =
            unproject_to_camera(Eigen::Vector2d(x, y), src.at(x, y), k);
        const Eigen::Vector3d warped = rot * cam_pt + motion.trans;
        if (warped.z() <= kDepthEpsilon) continue;
        const Eigen::Vector2d px(k.fx * warped.x() / warped.z() + k.cx,
                                 k.fy * warped.y() / warped.z() + k.cy);
        const long lx = std::lround(px.x());
        const long ly = std::lround(px.y());
        if (lx < 0 || lx >= dst.width || ly < 0 || ly >= dst.height) continue;
        if (!is_static(t + 1, int(lx), int(ly))) continue;
        const auto target = sample_depth_bilinear(dst, px);
        if (!target) continue;
        const double err = std::abs(warped.z() - *target) / *target;
        err_sum += err;
        for (size_t i = 0; i < thresholds.size(); ++i)
          if (err < thresholds[i]) ++inliers[i];
        ++samples;
      }
    }
  }

  SelfConsistencyResult result;
  result.samples = samples;
  result.inlier_pct.resize(thresholds.size(), 100.0);
  if (samples > 0) {
    result.sc = err_sum / double(samples);
    for (size_t i = 0; i < thresholds.size(); ++i)
      result.inlier_pct[i] = 100.0 * double(inliers[i]) / double(samples);
  }
  return result;
}

}  // namespace scene4d
