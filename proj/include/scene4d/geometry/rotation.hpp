#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "scene4d/error.hpp"

namespace scene4d {

inline constexpr double kSmallAngle = 1e-8;

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Rodrigues' formula. Below kSmallAngle the sin/cos coefficients switch to
/// their Taylor expansions so the result stays exact through the origin.
inline Eigen::Matrix3d rotvec_to_matrix(const Eigen::Vector3d& rotvec) {
  const double theta2 = rotvec.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a, b;  // sin(t)/t, (1-cos(t))/t^2
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    // 1 - cos(t) = 2 sin^2(t/2), free of cancellation for small t
    const double s = std::sin(0.5 * theta);
    b = 2.0 * s * s / theta2;
  }
  const Eigen::Matrix3d k = skew(rotvec);
  return Eigen::Matrix3d::Identity() + a * k + b * k * k;
}

inline bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-6) {
  const Eigen::Matrix3d delta = r.transpose() * r - Eigen::Matrix3d::Identity();
  return delta.cwiseAbs().maxCoeff() <= tol && r.determinant() > 0.0;
}

namespace detail {

// Antipodal rotations (angle pi) have two equivalent axis signs; pick the one
// whose first nonzero component is positive so results are unique.
inline Eigen::Vector3d fix_antipodal_sign(Eigen::Vector3d v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace detail

/// Log map: rotation matrix -> axis-angle vector with norm in [0, pi].
/// Throws NotARotation if r is not orthonormal within tol.
inline Eigen::Vector3d matrix_to_rotvec(const Eigen::Matrix3d& r,
                                        double tol = 1e-6) {
  if (!is_rotation(r, tol)) throw NotARotation("matrix is not a rotation");
  const double cos_theta =
      std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Eigen::Vector3d v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0),
                          r(1, 0) - r(0, 1));  // 2 sin(theta) * axis
  if (theta < kSmallAngle) {
    return 0.5 * v;  // sin(t)/t ~ 1 at this scale
  }
  if (theta < M_PI - 1e-4) {
    return (theta / (2.0 * std::sin(theta))) * v;
  }
  // Near pi the skew part degenerates; recover the axis from the symmetric
  // part: (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) n n^T.
  const Eigen::Matrix3d sym =
      0.5 * (r + r.transpose()) - cos_theta * Eigen::Matrix3d::Identity();
  const double denom = 1.0 - cos_theta;
  int imax = 0;
  sym.diagonal().maxCoeff(&imax);
  Eigen::Vector3d axis;
  axis[imax] = std::sqrt(std::max(0.0, sym(imax, imax) / denom));
  for (int i = 0; i < 3; ++i) {
    if (i != imax) axis[i] = sym(imax, i) / (denom * axis[imax]);
  }
  axis.normalize();
  if (v.norm() > 1e-8) {
    if (axis.dot(v) < 0) axis = -axis;  // sign from the remaining skew part
  } else {
    axis = detail::fix_antipodal_sign(axis);
  }
  return theta * axis;
}

/// Wraps the angle into [0, pi], flipping the axis when needed. Exact-pi
/// results use the antipodal sign convention of matrix_to_rotvec.
inline Eigen::Vector3d canonicalize_rotvec(const Eigen::Vector3d& rotvec) {
  double theta = rotvec.norm();
  if (theta <= M_PI) return rotvec;
  const Eigen::Vector3d axis = rotvec / theta;
  theta = std::fmod(theta, 2.0 * M_PI);
  if (theta > M_PI) return (theta - 2.0 * M_PI) * axis;  // negative * axis
  if (theta == M_PI) return detail::fix_antipodal_sign(theta * axis);
  return theta * axis;
}

/// Right Jacobian of SO(3): exp((v + d)^) = exp(v^) exp((Jr(v) d)^) + O(d^2).
inline Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& rotvec) {
  const double theta2 = rotvec.squaredNorm();
  const double theta = std::sqrt(theta2);
  double c1, c2;  // (1-cos t)/t^2, (t - sin t)/t^3
  if (theta < 1e-5) {
    c1 = 0.5 - theta2 / 24.0;
    c2 = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double s = std::sin(0.5 * theta);
    c1 = 2.0 * s * s / theta2;
    c2 = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Eigen::Matrix3d k = skew(rotvec);
  return Eigen::Matrix3d::Identity() - c1 * k + c2 * k * k;
}

inline Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& rotvec) {
  const double theta2 = rotvec.squaredNorm();
  const double theta = std::sqrt(theta2);
  double c;  // 1/t^2 - cot(t/2)/(2t), stable away from 0 via half-angle form
  if (theta < 1e-5) {
    c = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    c = 1.0 / theta2 -
        std::cos(0.5 * theta) / (2.0 * theta * std::sin(0.5 * theta));
  }
  const Eigen::Matrix3d k = skew(rotvec);
  return Eigen::Matrix3d::Identity() + 0.5 * k + c * k * k;
}

}  // namespace scene4d
