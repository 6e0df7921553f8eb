#pragma once

#include <optional>

#include <Eigen/Dense>

#include "scene4d/error.hpp"
#include "scene4d/geometry/pose.hpp"

namespace scene4d {

inline constexpr double kDepthEpsilon = 1e-6;

struct Intrinsics {
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
  int width = 0;
  int height = 0;

  void validate() const {
    if (!(fx > 0) || !(fy > 0))
      throw Error("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0)
      throw Error("intrinsics: image size must be positive");
    if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height))
      throw Error("intrinsics: principal point outside image");
  }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    return k;
  }
};

/// Pinhole projection of a camera-space point. Throws BehindCamera when the
/// point sits on or behind the image plane (z <= kDepthEpsilon).
inline Eigen::Vector2d project_camera_point(const Eigen::Vector3d& p_cam,
                                            const Intrinsics& k) {
  if (p_cam.z() <= kDepthEpsilon)
    throw BehindCamera("point behind camera, z=" + std::to_string(p_cam.z()));
  return {k.fx * p_cam.x() / p_cam.z() + k.cx,
          k.fy * p_cam.y() / p_cam.z() + k.cy};
}

inline Eigen::Vector2d project(const Eigen::Vector3d& point_world,
                               const Pose& pose, const Intrinsics& k) {
  return project_camera_point(pose.apply(point_world), k);
}

inline std::optional<Eigen::Vector2d> try_project(
    const Eigen::Vector3d& point_world, const Pose& pose,
    const Intrinsics& k) {
  const Eigen::Vector3d p_cam = pose.apply(point_world);
  if (p_cam.z() <= kDepthEpsilon) return std::nullopt;
  return project_camera_point(p_cam, k);
}

/// Pixel + depth -> camera-space point with z = depth.
inline Eigen::Vector3d unproject_to_camera(const Eigen::Vector2d& pixel,
                                           double depth, const Intrinsics& k) {
  if (!(depth > 0))
    throw NonPositiveDepth("unproject: depth=" + std::to_string(depth));
  return {depth * (pixel.x() - k.cx) / k.fx, depth * (pixel.y() - k.cy) / k.fy,
          depth};
}

inline Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                                 const Pose& pose, const Intrinsics& k) {
  const Eigen::Vector3d p_cam = unproject_to_camera(pixel, depth, k);
  const Eigen::Matrix3d rt = pose.rotation().transpose();
  return rt * (p_cam - pose.trans);
}

}  // namespace scene4d
