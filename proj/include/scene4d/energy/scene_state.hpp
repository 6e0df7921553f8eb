#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/error.hpp"
#include "scene4d/geometry/trajectory.hpp"

namespace scene4d {

/// One world point per static tracklet, keyed by tracklet id.
struct StaticPointSet {
  std::map<int, Eigen::Vector3d> points;
};

/// Per-frame 3D points of one dynamic tracklet; validity mirrors (a subset
/// of) the tracklet's 2D visibility.
struct DynTrajectory {
  std::vector<Eigen::Vector3d> points;
  std::vector<char> validity;

  bool valid_at(int t) const { return validity[t] != 0; }
};

struct DynamicTrajectorySet {
  std::map<int, DynTrajectory> trajectories;
  std::map<int, int> instance_of;             // tracklet id -> instance id
  std::map<int, std::vector<int>> neighbors;  // tracklet id -> KNN ids
};

struct EnergyWeights {
  double w_smooth = 10.0;
  double w_arap = 100.0;
  double w_cam = 1.0;
  double epsilon_cam = 1e-6;
  double huber_delta = 0.0;  // <= 0 disables the optional Huber kernel
};

/// Gradient accumulator mirroring the scene layout. Pose entries stack
/// [d/d rotvec; d/d trans].
struct SceneGrad {
  std::vector<Eigen::Matrix<double, 6, 1>> pose;
  double fx = 0.0;
  double fy = 0.0;
  std::map<int, Eigen::Vector3d> static_points;
  std::map<int, std::vector<Eigen::Vector3d>> dyn_points;

  void resize_poses(int frames) {
    pose.assign(frames, Eigen::Matrix<double, 6, 1>::Zero());
  }

  // map entries must be zeroed on first touch (Eigen default-constructs
  // uninitialized)
  Eigen::Vector3d& static_grad(int id) {
    return static_points.try_emplace(id, Eigen::Vector3d::Zero()).first->second;
  }

  std::vector<Eigen::Vector3d>& dyn_grad(int id, int frames) {
    return dyn_points
        .try_emplace(id, std::vector<Eigen::Vector3d>(
                             frames, Eigen::Vector3d::Zero()))
        .first->second;
  }
};

/// One energy contribution, exposed for outlier filtering.
struct ResidualRecord {
  int tracklet_id = 0;
  int frame = 0;       // observation frame (for e_init: the target frame t')
  double value = 0.0;  // pixel-space residual magnitude
  bool behind = false; // replaced by the behind-camera penalty
};

inline constexpr double kBehindPenalty = 1e4;  // px, constant, zero gradient

}  // namespace scene4d
