#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/error.hpp"
#include "scene4d/eval/alignment.hpp"
#include "scene4d/geometry/pose.hpp"

namespace scene4d {

namespace detail {

inline std::vector<Eigen::Vector3d> camera_centers(const std::vector<Pose>& poses) {
  std::vector<Eigen::Vector3d> centers;
  centers.reserve(poses.size());
  for (const Pose& p : poses) centers.push_back(camera_center(p));
  return centers;
}

}  // namespace detail

/// Absolute trajectory error: RMSE of camera-center differences after a
/// Sim(3) Umeyama alignment of the estimated centers onto the reference.
inline double ate(const std::vector<Pose>& estimated,
                  const std::vector<Pose>& reference) {
  if (estimated.size() != reference.size())
    throw LengthMismatch("ate: " + std::to_string(estimated.size()) + " vs " +
                         std::to_string(reference.size()) + " frames");
  const auto align = umeyama(detail::camera_centers(estimated),
                             detail::camera_centers(reference), true);
  return align.residual_rms;
}

struct RpeResult {
  double rpe_trans = 0.0;
  double rpe_rot_deg = 0.0;
};

/// Relative pose error over frame offset `delta`. Estimated translations are
/// scale-corrected by the Sim(3) alignment scale before forming relative
/// motions; the rotation component is reported as an RMSE of angles in
/// degrees.
inline RpeResult rpe(const std::vector<Pose>& estimated,
                     const std::vector<Pose>& reference, int delta = 1) {
  if (estimated.size() != reference.size())
    throw LengthMismatch("rpe: " + std::to_string(estimated.size()) + " vs " +
                         std::to_string(reference.size()) + " frames");
  if (delta < 1 || estimated.size() <= size_t(delta))
    throw LengthMismatch("rpe: need more than delta=" + std::to_string(delta) +
                         " frames");

  const double s = umeyama(detail::camera_centers(estimated),
                           detail::camera_centers(reference), true)
                       .scale;
  std::vector<Pose> est_scaled = estimated;
  for (Pose& p : est_scaled) p.trans *= s;

  double sq_trans = 0.0, sq_rot = 0.0;
  size_t count = 0;
  for (size_t t = 0; t + delta < est_scaled.size(); ++t) {
    const Pose rel_est = frame_motion(est_scaled[t], est_scaled[t + delta]);
    const Pose rel_ref = frame_motion(reference[t], reference[t + delta]);
    const Pose err = compose(inverse(rel_ref), rel_est);
    sq_trans += err.trans.squaredNorm();
    sq_rot += err.rotvec.squaredNorm();
    ++count;
  }
  RpeResult result;
  result.rpe_trans = std::sqrt(sq_trans / double(count));
  result.rpe_rot_deg = std::sqrt(sq_rot / double(count)) * 180.0 / M_PI;
  return result;
}

}  // namespace scene4d
