#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/error.hpp"
#include "scene4d/geometry/camera.hpp"

namespace scene4d {

/// Per-frame depth raster in scene units; row-major, top row first.
/// Invalid pixels (non-positive or non-finite on disk) carry validity false.
struct DepthFrame {
  int frame_index = 0;
  int width = 0;
  int height = 0;
  std::vector<float> values;
  std::vector<char> validity;

  float at(int x, int y) const { return values[y * width + x]; }
  bool valid_at(int x, int y) const { return validity[y * width + x] != 0; }
};

/// Per-frame instance raster: 0 = static background, k>0 = dynamic instance k.
struct MaskFrame {
  int frame_index = 0;
  int width = 0;
  int height = 0;
  std::vector<uint16_t> labels;

  uint16_t at(int x, int y) const { return labels[y * width + x]; }
};

/// 2D point track over the whole sequence. label: kUnlabeled before
/// classification, kStaticLabel for static, k>0 for dynamic instance k.
struct Tracklet {
  static constexpr int kUnlabeled = -1;
  static constexpr int kStaticLabel = 0;

  int id = 0;
  std::vector<Eigen::Vector2d> points;
  std::vector<char> visibility;
  int label = kUnlabeled;

  bool is_static() const { return label == kStaticLabel; }
  bool is_dynamic() const { return label > 0; }
  bool visible_at(int t) const { return visibility[t] != 0; }

  int visible_count() const {
    int n = 0;
    for (char v : visibility) n += v != 0;
    return n;
  }
};

/// All per-video inputs: depth, masks, tracklets, initial intrinsics.
struct CueBundle {
  std::vector<DepthFrame> depth;
  std::vector<MaskFrame> masks;
  std::vector<Tracklet> tracklets;
  Intrinsics init_intrinsics;

  int frame_count() const { return static_cast<int>(depth.size()); }

  void validate() const {
    init_intrinsics.validate();
    const int t_count = frame_count();
    if (t_count < 2)
      throw InconsistentDimensions(
          "cue bundle needs at least 2 frames, got " + std::to_string(t_count));
    if (static_cast<int>(masks.size()) != t_count)
      throw InconsistentDimensions("mask count differs from depth count");
    const int w = init_intrinsics.width;
    const int h = init_intrinsics.height;
    for (const DepthFrame& d : depth) {
      if (d.width != w || d.height != h ||
          static_cast<int>(d.values.size()) != w * h ||
          d.values.size() != d.validity.size())
        throw InconsistentDimensions("depth frame " +
                                     std::to_string(d.frame_index));
      for (size_t i = 0; i < d.values.size(); ++i)
        if (d.validity[i] && !(std::isfinite(d.values[i]) && d.values[i] > 0))
          throw Error("depth frame " + std::to_string(d.frame_index) +
                      ": valid pixel with non-positive depth");
    }
    for (const MaskFrame& m : masks) {
      if (m.width != w || m.height != h ||
          static_cast<int>(m.labels.size()) != w * h)
        throw InconsistentDimensions("mask frame " +
                                     std::to_string(m.frame_index));
    }
    for (const Tracklet& t : tracklets) {
      if (static_cast<int>(t.points.size()) != t_count ||
          t.points.size() != t.visibility.size())
        throw InconsistentDimensions("tracklet " + std::to_string(t.id));
      if (t.visible_count() < 2)
        throw Error("tracklet " + std::to_string(t.id) +
                    " visible in fewer than 2 frames");
      for (int f = 0; f < t_count; ++f) {
        if (!t.visible_at(f)) continue;
        const Eigen::Vector2d& p = t.points[f];
        if (!(p.x() >= -0.5 && p.x() < w - 0.5 && p.y() >= -0.5 &&
              p.y() < h - 0.5))
          throw Error("tracklet " + std::to_string(t.id) +
                      " leaves the image at frame " + std::to_string(f));
      }
    }
  }
};

}  // namespace scene4d
