#pragma once

#include <vector>

#include <Eigen/Dense>

#include "scene4d/cues/cues.hpp"
#include "scene4d/cues/sampling.hpp"
#include "scene4d/energy/scene_state.hpp"
#include "scene4d/geometry/rotation.hpp"

namespace scene4d {

namespace detail {

inline Eigen::Matrix<double, 2, 3> proj_jacobian(const Eigen::Vector3d& y,
                                                 const Intrinsics& k) {
  const double iz = 1.0 / y.z();
  Eigen::Matrix<double, 2, 3> a;
  a << k.fx * iz, 0.0, -k.fx * y.x() * iz * iz,  //
      0.0, k.fy * iz, -k.fy * y.y() * iz * iz;
  return a;
}

/// Smooth-L1 style kernel: quadratic inside delta, linear (slope 1) outside.
/// Disabled (plain r) when delta <= 0.
inline double robust_value(double r, double delta) {
  if (delta <= 0) return r;
  return r <= delta ? r * r / (2.0 * delta) : r - 0.5 * delta;
}

inline double robust_slope(double r, double delta) {
  if (delta <= 0) return 1.0;
  return r <= delta ? r / delta : 1.0;
}

struct FrameCache {
  std::vector<Eigen::Matrix3d> rot;  // R_t
  std::vector<Eigen::Matrix3d> jr;   // Jr(rotvec_t)

  explicit FrameCache(const Trajectory& traj) {
    rot.reserve(traj.poses.size());
    jr.reserve(traj.poses.size());
    for (const Pose& p : traj.poses) {
      rot.push_back(p.rotation());
      jr.push_back(so3_right_jacobian(p.rotvec));
    }
  }
};

}  // namespace detail

/// Static reprojection energy: sum over visible (k, t) of the unsquared
/// pixel-space L2 distance between the observation and the projected static
/// point. Points behind the camera contribute a constant penalty.
inline double e_ba(const Trajectory& traj, const StaticPointSet& pts,
                   const std::vector<Tracklet>& tracklets,
                   double huber_delta = 0.0,
                   std::vector<ResidualRecord>* residuals = nullptr,
                   SceneGrad* grad = nullptr, int* behind_count = nullptr) {
  const Intrinsics& k = traj.intrinsics;
  const int frames = traj.num_frames();
  detail::FrameCache cache(traj);
  double energy = 0.0;
  int behind = 0;

  for (const Tracklet& tr : tracklets) {
    if (!tr.is_static()) continue;
    const auto it = pts.points.find(tr.id);
    if (it == pts.points.end()) continue;  // filtered out
    const Eigen::Vector3d& p = it->second;
    for (int t = 0; t < frames; ++t) {
      if (!tr.visible_at(t)) continue;
      const Eigen::Vector3d y = cache.rot[t] * p + traj.poses[t].trans;
      if (y.z() <= kDepthEpsilon) {
        energy += kBehindPenalty;
        ++behind;
        if (residuals)
          residuals->push_back({tr.id, t, kBehindPenalty, true});
        continue;
      }
      const Eigen::Vector2d proj(k.fx * y.x() / y.z() + k.cx,
                                 k.fy * y.y() / y.z() + k.cy);
      const Eigen::Vector2d e = proj - tr.points[t];
      const double r = e.norm();
      energy += detail::robust_value(r, huber_delta);
      if (residuals) residuals->push_back({tr.id, t, r, false});
      if (grad && r > 0) {
        const Eigen::Vector2d dr =
            detail::robust_slope(r, huber_delta) * (e / r);
        const Eigen::Matrix<double, 2, 3> a = detail::proj_jacobian(y, k);
        const Eigen::Vector3d g_y = a.transpose() * dr;
        grad->static_grad(tr.id) += cache.rot[t].transpose() * g_y;
        grad->pose[t].tail<3>() += g_y;
        grad->pose[t].head<3>() -=
            (cache.rot[t] * skew(p) * cache.jr[t]).transpose() * g_y;
        grad->fx += dr.x() * y.x() / y.z();
        grad->fy += dr.y() * y.y() / y.z();
      }
    }
  }
  if (behind_count) *behind_count = behind;
  return energy;
}

/// Dynamic reprojection energy, same form as e_ba with time-varying points.
/// The trajectory is treated as fixed: gradients flow only into the points.
inline double e_nr(const Trajectory& traj, const DynamicTrajectorySet& dyn,
                   const std::vector<Tracklet>& tracklets,
                   double huber_delta = 0.0,
                   std::vector<ResidualRecord>* residuals = nullptr,
                   SceneGrad* grad = nullptr, int* behind_count = nullptr) {
  const Intrinsics& k = traj.intrinsics;
  const int frames = traj.num_frames();
  detail::FrameCache cache(traj);
  double energy = 0.0;
  int behind = 0;

  for (const Tracklet& tr : tracklets) {
    if (!tr.is_dynamic()) continue;
    const auto it = dyn.trajectories.find(tr.id);
    if (it == dyn.trajectories.end()) continue;
    const DynTrajectory& dt = it->second;
    for (int t = 0; t < frames; ++t) {
      if (!tr.visible_at(t) || !dt.valid_at(t)) continue;
      const Eigen::Vector3d y = cache.rot[t] * dt.points[t] + traj.poses[t].trans;
      if (y.z() <= kDepthEpsilon) {
        energy += kBehindPenalty;
        ++behind;
        if (residuals)
          residuals->push_back({tr.id, t, kBehindPenalty, true});
        continue;
      }
      const Eigen::Vector2d proj(k.fx * y.x() / y.z() + k.cx,
                                 k.fy * y.y() / y.z() + k.cy);
      const Eigen::Vector2d e = proj - tr.points[t];
      const double r = e.norm();
      energy += detail::robust_value(r, huber_delta);
      if (residuals) residuals->push_back({tr.id, t, r, false});
      if (grad && r > 0) {
        const Eigen::Vector2d dr =
            detail::robust_slope(r, huber_delta) * (e / r);
        const Eigen::Vector3d g_y =
            detail::proj_jacobian(y, k).transpose() * dr;
        grad->dyn_grad(tr.id, frames)[t] += cache.rot[t].transpose() * g_y;
      }
    }
  }
  if (behind_count) *behind_count = behind;
  return energy;
}

/// Camera-initialization energy: squared reprojection of depth-unprojected
/// track points across every ordered frame pair closer than `window`.
/// Restricted to frames in [t_begin, t_end); t_end < 0 means the whole
/// sequence. Pairs with invalid depth at the source sample are skipped.
inline double e_init(const Trajectory& traj,
                     const std::vector<DepthFrame>& depth,
                     const std::vector<Tracklet>& tracklets, int window = 5,
                     SceneGrad* grad = nullptr, int* behind_count = nullptr,
                     int t_begin = 0, int t_end = -1) {
  const Intrinsics& k = traj.intrinsics;
  const int frames = traj.num_frames();
  if (static_cast<int>(depth.size()) != frames)
    throw DimensionMismatch("e_init: depth frame count != pose count");
  if (t_end < 0) t_end = frames;
  detail::FrameCache cache(traj);
  double energy = 0.0;
  int behind = 0;

  for (int t = t_begin; t < t_end; ++t) {
    for (int tp = std::max(t_begin, t - window + 1);
         tp < std::min(t_end, t + window); ++tp) {
      if (tp == t) continue;
      for (const Tracklet& tr : tracklets) {
        if (!tr.is_static()) continue;
        if (!tr.visible_at(t) || !tr.visible_at(tp)) continue;
        const auto d = sample_depth_bilinear(depth[t], tr.points[t]);
        if (!d.has_value()) continue;

        // unproject observation at frame t, reproject into frame tp
        const Eigen::Vector3d x_cam(
            *d * (tr.points[t].x() - k.cx) / k.fx,
            *d * (tr.points[t].y() - k.cy) / k.fy, *d);
        const Eigen::Vector3d x_world =
            cache.rot[t].transpose() * (x_cam - traj.poses[t].trans);
        const Eigen::Vector3d y =
            cache.rot[tp] * x_world + traj.poses[tp].trans;
        if (y.z() <= kDepthEpsilon) {
          energy += kBehindPenalty;
          ++behind;
          continue;
        }
        const Eigen::Vector2d proj(k.fx * y.x() / y.z() + k.cx,
                                   k.fy * y.y() / y.z() + k.cy);
        const Eigen::Vector2d e = proj - tr.points[tp];
        energy += e.squaredNorm();
        if (!grad) continue;

        const Eigen::Vector2d de = 2.0 * e;
        const Eigen::Matrix<double, 2, 3> a = detail::proj_jacobian(y, k);
        const Eigen::Vector3d g_y = a.transpose() * de;

        grad->pose[tp].tail<3>() += g_y;
        grad->pose[tp].head<3>() -=
            (cache.rot[tp] * skew(x_world) * cache.jr[tp]).transpose() * g_y;

        const Eigen::Vector3d g_x = cache.rot[tp].transpose() * g_y;  // d/dX
        grad->pose[t].head<3>() +=
            (skew(x_world) * cache.jr[t]).transpose() * g_x;
        grad->pose[t].tail<3>() -= cache.rot[t] * g_x;  // via -R_t^T chain

        // focal: through projection at tp and through unprojection at t
        const Eigen::Vector3d dxcam_dfx(
            -*d * (tr.points[t].x() - k.cx) / (k.fx * k.fx), 0.0, 0.0);
        const Eigen::Vector3d dxcam_dfy(
            0.0, -*d * (tr.points[t].y() - k.cy) / (k.fy * k.fy), 0.0);
        const Eigen::Vector3d g_xcam = cache.rot[t] * g_x;  // d/dx_cam
        grad->fx += de.x() * y.x() / y.z() + g_xcam.dot(dxcam_dfx);
        grad->fy += de.y() * y.y() / y.z() + g_xcam.dot(dxcam_dfy);
      }
    }
  }
  if (behind_count) *behind_count = behind;
  return energy;
}

}  // namespace scene4d
