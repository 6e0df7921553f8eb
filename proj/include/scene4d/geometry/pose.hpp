#pragma once

#include <Eigen/Dense>

#include "scene4d/geometry/rotation.hpp"

namespace scene4d {

/// World-to-camera rigid transform: p_cam = R(rotvec) * p_world + trans.
struct Pose {
  Eigen::Vector3d rotvec = Eigen::Vector3d::Zero();
  Eigen::Vector3d trans = Eigen::Vector3d::Zero();

  static Pose identity() { return Pose{}; }

  Eigen::Matrix3d rotation() const { return rotvec_to_matrix(rotvec); }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation() * p + trans;
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation();
    m.topRightCorner<3, 1>() = trans;
    return m;
  }

  static Pose from_matrix(const Eigen::Matrix4d& m) {
    return Pose{matrix_to_rotvec(m.topLeftCorner<3, 3>()),
                m.topRightCorner<3, 1>()};
  }
};

inline Pose compose(const Pose& a, const Pose& b) {
  const Eigen::Matrix3d ra = a.rotation();
  return Pose{matrix_to_rotvec(ra * b.rotation()), ra * b.trans + a.trans};
}

inline Pose inverse(const Pose& p) {
  const Eigen::Matrix3d rt = p.rotation().transpose();
  return Pose{-p.rotvec, -(rt * p.trans)};
}

/// Transform expressing a in the frame of b: relative(a, b) = b^-1 * a.
inline Pose relative(const Pose& a, const Pose& b) {
  return compose(inverse(b), a);
}

/// Camera-frame motion between consecutive frames: the transform that maps
/// points in camera t coordinates to camera t+1 coordinates,
/// pose_t1 * pose_t^-1 (both world-to-camera).
inline Pose frame_motion(const Pose& pose_t, const Pose& pose_t1) {
  return compose(pose_t1, inverse(pose_t));
}

/// Camera center in world coordinates: -R^T t.
inline Eigen::Vector3d camera_center(const Pose& p) {
  return -(p.rotation().transpose() * p.trans);
}

}  // namespace scene4d
