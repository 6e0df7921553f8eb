#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "scene4d/cues/cues.hpp"
#include "scene4d/cues/sampling.hpp"
#include "scene4d/geometry/camera.hpp"
#include "scene4d/geometry/trajectory.hpp"
#include "scene4d/parallel.hpp"
#include "scene4d/pipeline/config.hpp"

namespace scene4d {

/// Densification output: per-frame rescaled depth plus a raster marking which
/// pixels had trajectory support (1 = rescaled, 0 = raw depth kept).
struct DensifyResult {
  std::vector<DepthFrame> frames;
  std::vector<std::vector<char>> supported;
};

namespace detail {

struct DensifySupport {
  Eigen::Vector3d world;
  double ratio;  // rendered camera depth / observed depth at the projection
  uint16_t label;
};

inline constexpr double kExactHitDistance = 1e-9;

}  // namespace detail

/// Per-pixel depth rescaling from sparse trajectories. Each pixel's raw depth
/// is multiplied by s(x), the inverse-distance-weighted mean of the
/// depth-consistency ratios of the 3 nearest same-mask-label trajectory
/// points (distances measured in 3D to the unprojected pixel; weights
/// normalized to sum 1). A trajectory point closer than 1e-9 wins outright
/// with its single ratio. Pixels with fewer than 3 same-label supports keep
/// their raw depth and stay flagged unsupported.
inline DensifyResult densify(const CueBundle& bundle, const Trajectory& traj,
                             const StaticPointSet& statics,
                             const DynamicTrajectorySet& dyn,
                             int threads = 1) {
  const Intrinsics& k = traj.intrinsics;
  const int frames = bundle.frame_count();
  const int w = k.width;
  const int h = k.height;

  DensifyResult out;
  out.frames = bundle.depth;
  out.supported.assign(frames, std::vector<char>(w * h, 0));

  parallel_for(frames, threads, [&](int t) {
    const Pose& pose = traj.poses[t];
    std::vector<detail::DensifySupport> sup;
    auto add_support = [&](const Eigen::Vector3d& p, uint16_t label) {
      const Eigen::Vector3d pc = pose.apply(p);
      if (pc.z() <= kDepthEpsilon) return;
      const Eigen::Vector2d px(k.fx * pc.x() / pc.z() + k.cx,
                               k.fy * pc.y() / pc.z() + k.cy);
      if (!(px.x() >= -0.5 && px.x() < w - 0.5 && px.y() >= -0.5 &&
            px.y() < h - 0.5))
        return;
      const auto z = sample_depth_bilinear(bundle.depth[t], px);
      if (!z || !(*z > 0)) return;
      sup.push_back({p, pc.z() / *z, label});
    };
    for (const auto& [id, p] : statics.points) add_support(p, 0);
    for (const auto& [id, dt] : dyn.trajectories)
      if (dt.valid_at(t))
        add_support(dt.points[t],
                    static_cast<uint16_t>(dyn.instance_of.at(id)));

    DepthFrame& dst = out.frames[t];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!dst.valid_at(x, y)) continue;
        const double raw = dst.at(x, y);
        if (!(raw > 0)) continue;
        const uint16_t label = bundle.masks[t].at(x, y);
        const Eigen::Vector3d target =
            unproject(Eigen::Vector2d(x, y), raw, pose, k);

        // 3 nearest same-label supports; ties keep the earlier entry
        int best[3] = {-1, -1, -1};
        double dist2[3] = {0, 0, 0};
        int count = 0;
        for (size_t i = 0; i < sup.size(); ++i) {
          if (sup[i].label != label) continue;
          double d2 = (sup[i].world - target).squaredNorm();
          int idx = static_cast<int>(i);
          for (int s = 0; s < 3; ++s) {
            if (s >= count) {
              best[s] = idx;
              dist2[s] = d2;
              break;
            }
            if (d2 < dist2[s]) {
              std::swap(best[s], idx);
              std::swap(dist2[s], d2);
            }
          }
          if (count < 3) ++count;
        }
        if (count == 0) continue;

        double scale;
        if (dist2[0] <
            detail::kExactHitDistance * detail::kExactHitDistance) {
          scale = sup[best[0]].ratio;
        } else if (count >= 3) {
          double wsum = 0.0;
          double s = 0.0;
          for (int i = 0; i < 3; ++i) {
            const double wi = 1.0 / std::sqrt(dist2[i]);
            wsum += wi;
            s += wi * sup[best[i]].ratio;
          }
          scale = s / wsum;
        } else {
          continue;  // not enough support, raw depth kept
        }
        dst.values[y * w + x] = static_cast<float>(scale * raw);
        out.supported[t][y * w + x] = 1;
      }
    }
  });
  return out;
}

/// Depth-discontinuity mask: pixel is an edge where the larger of the
/// central-difference gradients along u and v exceeds `threshold` times the
/// local depth. Falls back to one-sided differences at borders and next to
/// invalid pixels; invalid pixels are never edges.
inline std::vector<char> depth_edges(const DepthFrame& d, double threshold) {
  std::vector<char> edge(d.width * d.height, 0);
  auto axis_grad = [&](int x, int y, int dx, int dy) {
    const bool lo = x - dx >= 0 && y - dy >= 0 && d.valid_at(x - dx, y - dy);
    const bool hi =
        x + dx < d.width && y + dy < d.height && d.valid_at(x + dx, y + dy);
    if (lo && hi)
      return 0.5 * std::abs(d.at(x + dx, y + dy) - d.at(x - dx, y - dy));
    if (hi) return static_cast<double>(std::abs(d.at(x + dx, y + dy) - d.at(x, y)));
    if (lo) return static_cast<double>(std::abs(d.at(x, y) - d.at(x - dx, y - dy)));
    return 0.0;
  };
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      if (!d.valid_at(x, y)) continue;
      const double g = std::max(axis_grad(x, y, 1, 0), axis_grad(x, y, 0, 1));
      if (g > threshold * d.at(x, y)) edge[y * d.width + x] = 1;
    }
  return edge;
}

/// Full solver output.
struct SceneSolution {
  Trajectory trajectory;
  StaticPointSet static_points;
  DynamicTrajectorySet dyn_trajectories;
  std::vector<DepthFrame> fused_depth;
  std::vector<std::vector<char>> supported;   // densification support rasters
  std::vector<std::vector<char>> edge_masks;  // 1 = depth discontinuity
  std::vector<Eigen::Vector3f> static_cloud;  // unprojected static surface
  PipelineDiagnostics diagnostics;
};

/// Assembles the final solution: computes edge masks on the aligned depth,
/// unprojects every valid, non-edge, static-mask pixel into the world-space
/// static cloud, and carries the optimized trajectory, points, and dynamic
/// trajectories through unchanged.
inline SceneSolution fuse(const CueBundle& bundle, const Trajectory& traj,
                          const DensifyResult& aligned, double grad_threshold,
                          const StaticPointSet& statics = {},
                          const DynamicTrajectorySet& dyn = {},
                          int threads = 1) {
  const int frames = bundle.frame_count();
  SceneSolution sol;
  sol.trajectory = traj;
  sol.static_points = statics;
  sol.dyn_trajectories = dyn;
  sol.fused_depth = aligned.frames;
  sol.supported = aligned.supported;
  sol.edge_masks.resize(frames);

  parallel_for(frames, threads, [&](int t) {
    sol.edge_masks[t] = depth_edges(sol.fused_depth[t], grad_threshold);
  });

  const Intrinsics& k = traj.intrinsics;
  for (int t = 0; t < frames; ++t) {
    const DepthFrame& d = sol.fused_depth[t];
    for (int y = 0; y < k.height; ++y)
      for (int x = 0; x < k.width; ++x) {
        if (!d.valid_at(x, y) || sol.edge_masks[t][y * k.width + x] ||
            bundle.masks[t].at(x, y) != 0)
          continue;
        const double z = d.at(x, y);
        if (!(z > 0)) continue;
        sol.static_cloud.push_back(
            unproject(Eigen::Vector2d(x, y), z, traj.poses[t], k)
                .cast<float>());
      }
  }
  return sol;
}

}  // namespace scene4d
