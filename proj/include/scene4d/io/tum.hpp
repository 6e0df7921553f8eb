#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "scene4d/error.hpp"
#include "scene4d/geometry/pose.hpp"

namespace scene4d {

/// Writes poses in TUM trajectory format: `timestamp tx ty tz qx qy qz qw`,
/// one line per frame, timestamp = frame index. The file stores the
/// camera-to-world transform, inverted from the internal world-to-camera
/// convention.
inline void save_tum(const std::string& path, const std::vector<Pose>& poses) {
  std::ofstream out(path);
  if (!out) throw Error("tum write: cannot open " + path);
  out << "# timestamp tx ty tz qx qy qz qw (camera-to-world)\n";
  char line[512];
  for (size_t t = 0; t < poses.size(); ++t) {
    const Eigen::Matrix3d r_c2w = poses[t].rotation().transpose();
    const Eigen::Vector3d c = -(r_c2w * poses[t].trans);
    Eigen::Quaterniond q(r_c2w);
    q.normalize();
    std::snprintf(line, sizeof(line),
                  "%.1f %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  static_cast<double>(t), c.x(), c.y(), c.z(), q.x(), q.y(),
                  q.z(), q.w());
    out << line;
  }
  if (!out) throw Error("tum write: short write on " + path);
}

inline std::vector<Pose> load_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("tum read: cannot open " + path);
  std::vector<std::pair<double, Pose>> stamped;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
      throw CorruptHeader("tum read: malformed line in " + path);
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (q.norm() < 1e-9)
      throw CorruptHeader("tum read: zero quaternion in " + path);
    q.normalize();
    const Eigen::Matrix3d r_c2w = q.toRotationMatrix();
    Pose pose;
    pose.rotvec = matrix_to_rotvec(r_c2w.transpose());
    pose.trans = -(r_c2w.transpose() * Eigen::Vector3d(tx, ty, tz));
    stamped.emplace_back(ts, pose);
  }
  std::stable_sort(stamped.begin(), stamped.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Pose> poses;
  poses.reserve(stamped.size());
  for (auto& [ts, p] : stamped) poses.push_back(p);
  return poses;
}

}  // namespace scene4d
