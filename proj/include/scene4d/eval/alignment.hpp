#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "scene4d/error.hpp"

namespace scene4d {

/// Similarity transform mapping source points onto target points:
/// x_target ~ scale * rotation * x_source + translation.
struct AlignmentResult {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double residual_rms = 0.0;

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }
};

/// Closed-form least-squares Sim(3) (or SE(3) when with_scale is false)
/// alignment via the covariance SVD, with the reflection guard on the sign of
/// det(U)det(V). Needs at least 3 pairs spanning more than a line.
inline AlignmentResult umeyama(const std::vector<Eigen::Vector3d>& source,
                               const std::vector<Eigen::Vector3d>& target,
                               bool with_scale = true) {
  if (source.size() != target.size())
    throw LengthMismatch("umeyama: " + std::to_string(source.size()) + " vs " +
                         std::to_string(target.size()) + " points");
  const size_t n = source.size();
  if (n < 3) throw DegenerateConfiguration("umeyama: need at least 3 point pairs");

  Eigen::Vector3d mu_s = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_t = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < n; ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s /= double(n);
  mu_t /= double(n);

  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  double var_s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d ds = source[i] - mu_s;
    sigma += (target[i] - mu_t) * ds.transpose();
    var_s += ds.squaredNorm();
  }
  sigma /= double(n);
  var_s /= double(n);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();
  // rank < 2 means the points lie on a line (or a single point): the rotation
  // about that line is unobservable
  if (!(d(0) > 0) || d(1) <= 1e-12 * d(0))
    throw DegenerateConfiguration("umeyama: collinear or coincident points");

  Eigen::Vector3d s_fix = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0) s_fix(2) = -1;

  AlignmentResult result;
  result.rotation =
      svd.matrixU() * s_fix.asDiagonal() * svd.matrixV().transpose();
  result.scale = with_scale ? d.dot(s_fix) / var_s : 1.0;
  if (!(result.scale > 0))
    throw DegenerateConfiguration("umeyama: non-positive scale");
  result.translation = mu_t - result.scale * (result.rotation * mu_s);

  double sq = 0.0;
  for (size_t i = 0; i < n; ++i)
    sq += (target[i] - result.apply(source[i])).squaredNorm();
  result.residual_rms = std::sqrt(sq / double(n));
  return result;
}

}  // namespace scene4d
