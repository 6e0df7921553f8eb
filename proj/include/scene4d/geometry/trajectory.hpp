#pragma once

#include <vector>

#include "scene4d/error.hpp"
#include "scene4d/geometry/camera.hpp"
#include "scene4d/geometry/pose.hpp"

namespace scene4d {

/// Time-ordered camera poses (one per frame) sharing one set of intrinsics.
struct Trajectory {
  std::vector<Pose> poses;
  Intrinsics intrinsics;

  int num_frames() const { return static_cast<int>(poses.size()); }

  void validate() const {
    intrinsics.validate();
    if (poses.empty()) throw EmptyScene("trajectory has no poses");
  }
};

}  // namespace scene4d
