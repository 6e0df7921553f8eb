#pragma once

#include <vector>

#include <Eigen/Dense>

#include "scene4d/energy/scene_state.hpp"
#include "scene4d/geometry/pose.hpp"

namespace scene4d {

namespace detail {

// Subgradient direction of ||v||: zero at (numerically) zero, where the
// relative-motion differences land only up to rounding noise.
inline Eigen::Vector3d unit_or_zero(const Eigen::Vector3d& v) {
  const double n = v.norm();
  return n > 1e-12 ? Eigen::Vector3d(v / n) : Eigen::Vector3d::Zero();
}

}  // namespace detail

/// Camera smoothness energy: for each interior frame, the relative change of
/// consecutive frame-to-frame motions, normalized by their magnitudes,
/// separately for rotation (axis-angle) and translation. epsilon keeps the
/// static-camera 0/0 case at zero energy.
inline double e_cam(const Trajectory& traj, double epsilon_cam = 1e-6,
                    SceneGrad* grad = nullptr) {
  const int frames = traj.num_frames();
  if (frames < 3) return 0.0;
  const int edges = frames - 1;

  // per-edge relative motion and its derivatives w.r.t. the two poses
  std::vector<Eigen::Vector3d> phi(edges), tau(edges);
  std::vector<Eigen::Matrix3d> dphi_a(edges), dphi_b(edges);  // d phi / d rotvec
  std::vector<Eigen::Matrix3d> dtau_a(edges), dtau_b(edges);  // d tau / d rotvec
  std::vector<Eigen::Matrix3d> rel_rot(edges);
  for (int j = 0; j < edges; ++j) {
    const Eigen::Matrix3d r_j = traj.poses[j].rotation();
    const Eigen::Matrix3d r_j1 = traj.poses[j + 1].rotation();
    rel_rot[j] = r_j1 * r_j.transpose();
    phi[j] = matrix_to_rotvec(rel_rot[j]);
    tau[j] = traj.poses[j + 1].trans - rel_rot[j] * traj.poses[j].trans;
    if (grad) {
      const Eigen::Matrix3d jr_inv = so3_right_jacobian_inverse(phi[j]);
      const Eigen::Matrix3d jr_j = so3_right_jacobian(traj.poses[j].rotvec);
      const Eigen::Matrix3d jr_j1 =
          so3_right_jacobian(traj.poses[j + 1].rotvec);
      dphi_a[j] = -jr_inv * r_j * jr_j;
      dphi_b[j] = jr_inv * r_j * jr_j1;
      const Eigen::Matrix3d lever = rel_rot[j] * skew(traj.poses[j].trans) * r_j;
      dtau_a[j] = -lever * jr_j;
      dtau_b[j] = lever * jr_j1;
    }
  }

  double energy = 0.0;
  // one term per consecutive edge pair (j-1, j)
  for (int j = 1; j < edges; ++j) {
    for (int part = 0; part < 2; ++part) {
      const Eigen::Vector3d& prev = part == 0 ? phi[j - 1] : tau[j - 1];
      const Eigen::Vector3d& next = part == 0 ? phi[j] : tau[j];
      const Eigen::Vector3d delta = next - prev;
      const double n = delta.norm();
      const double d = prev.norm() + next.norm() + epsilon_cam;
      energy += 2.0 * n / d;
      if (!grad) continue;

      const Eigen::Vector3d g_next = (2.0 / d) * detail::unit_or_zero(delta) -
                                     (2.0 * n / (d * d)) *
                                         detail::unit_or_zero(next);
      const Eigen::Vector3d g_prev = -(2.0 / d) * detail::unit_or_zero(delta) -
                                     (2.0 * n / (d * d)) *
                                         detail::unit_or_zero(prev);
      if (part == 0) {
        grad->pose[j - 1].head<3>() += dphi_a[j - 1].transpose() * g_prev;
        grad->pose[j].head<3>() += dphi_b[j - 1].transpose() * g_prev;
        grad->pose[j].head<3>() += dphi_a[j].transpose() * g_next;
        grad->pose[j + 1].head<3>() += dphi_b[j].transpose() * g_next;
      } else {
        grad->pose[j - 1].head<3>() += dtau_a[j - 1].transpose() * g_prev;
        grad->pose[j].head<3>() += dtau_b[j - 1].transpose() * g_prev;
        grad->pose[j - 1].tail<3>() -= rel_rot[j - 1].transpose() * g_prev;
        grad->pose[j].tail<3>() += g_prev;
        grad->pose[j].head<3>() += dtau_a[j].transpose() * g_next;
        grad->pose[j + 1].head<3>() += dtau_b[j].transpose() * g_next;
        grad->pose[j].tail<3>() -= rel_rot[j].transpose() * g_next;
        grad->pose[j + 1].tail<3>() += g_next;
      }
    }
  }
  return energy;
}

}  // namespace scene4d
