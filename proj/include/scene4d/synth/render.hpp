#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/cues/cues.hpp"
#include "scene4d/geometry/camera.hpp"
#include "scene4d/geometry/pose.hpp"
#include "scene4d/parallel.hpp"
#include "scene4d/synth/scene.hpp"

namespace scene4d {

/// A primitive placed in the world for one frame, with its uniform pulse
/// scale applied to the half extents. label 0 = static, >0 = dynamic instance.
struct PlacedPrimitive {
  Primitive::Type type;
  Pose local_to_world;
  Eigen::Matrix3d rot;      // cached local_to_world rotation
  Eigen::Vector3d extents;  // scaled half extents
  double scale = 1.0;
  uint16_t label = 0;
};

struct RayHit {
  double depth = 0.0;  // ray parameter == camera depth for z-normalized dirs
  int primitive = -1;
};

namespace detail {

constexpr double kRayEpsilon = 1e-9;

inline std::optional<double> intersect_local(const PlacedPrimitive& prim,
                                             const Eigen::Vector3d& origin,
                                             const Eigen::Vector3d& dir) {
  // into the local frame
  const Eigen::Vector3d o = prim.rot.transpose() * (origin - prim.local_to_world.trans);
  const Eigen::Vector3d d = prim.rot.transpose() * dir;
  const Eigen::Vector3d& h = prim.extents;

  if (prim.type == Primitive::Type::kRect) {
    if (std::abs(d.z()) < 1e-14) return std::nullopt;
    const double s = -o.z() / d.z();
    if (s <= kRayEpsilon) return std::nullopt;
    const double x = o.x() + s * d.x();
    const double y = o.y() + s * d.y();
    if (std::abs(x) > h.x() || std::abs(y) > h.y()) return std::nullopt;
    return s;
  }

  // box: slab test
  double near = -std::numeric_limits<double>::infinity();
  double far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d(a)) < 1e-14) {
      if (std::abs(o(a)) > h(a)) return std::nullopt;
      continue;
    }
    double t1 = (-h(a) - o(a)) / d(a);
    double t2 = (h(a) - o(a)) / d(a);
    if (t1 > t2) std::swap(t1, t2);
    near = std::max(near, t1);
    far = std::min(far, t2);
    if (near > far) return std::nullopt;
  }
  if (far <= kRayEpsilon) return std::nullopt;
  return near > kRayEpsilon ? near : far;
}

}  // namespace detail

/// All primitives of the scene placed at frame t, statics first (label 0),
/// then dynamic objects with labels 1..N in spec order.
inline std::vector<PlacedPrimitive> place_primitives(const SceneSpec& spec, int t) {
  std::vector<PlacedPrimitive> placed;
  placed.reserve(spec.static_geometry.size() + spec.dynamic_objects.size());
  for (const Primitive& prim : spec.static_geometry) {
    PlacedPrimitive p;
    p.type = prim.type;
    p.local_to_world = Pose{prim.rotvec, prim.center};
    p.rot = p.local_to_world.rotation();
    p.extents = prim.half_extents;
    p.label = 0;
    placed.push_back(p);
  }
  for (size_t i = 0; i < spec.dynamic_objects.size(); ++i) {
    const DynamicObject& obj = spec.dynamic_objects[i];
    PlacedPrimitive p;
    p.type = obj.primitive.type;
    p.local_to_world = obj.motion.pose_at(obj.primitive, t);
    p.rot = p.local_to_world.rotation();
    p.scale = obj.motion.scale_at(t);
    p.extents = obj.primitive.half_extents * p.scale;
    p.label = uint16_t(i + 1);
    placed.push_back(p);
  }
  return placed;
}

/// Nearest intersection along the world-space ray, or miss.
inline std::optional<RayHit> cast_ray(const std::vector<PlacedPrimitive>& placed,
                                      const Eigen::Vector3d& origin,
                                      const Eigen::Vector3d& dir) {
  RayHit best;
  best.depth = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < placed.size(); ++i) {
    const auto s = detail::intersect_local(placed[i], origin, dir);
    if (s && *s < best.depth) {
      best.depth = *s;
      best.primitive = int(i);
    }
  }
  if (best.primitive < 0) return std::nullopt;
  return best;
}

/// World-space ray through a (possibly fractional) pixel; the direction is
/// normalized so the ray parameter equals camera-frame depth.
inline void pixel_ray(const Pose& pose, const Intrinsics& k,
                      const Eigen::Vector2d& px, Eigen::Vector3d* origin,
                      Eigen::Vector3d* dir) {
  const Eigen::Matrix3d rot = pose.rotation();
  *origin = camera_center(pose);
  const Eigen::Vector3d dir_cam((px.x() - k.cx) / k.fx, (px.y() - k.cy) / k.fy,
                                1.0);
  *dir = rot.transpose() * dir_cam;
}

/// Renders exact depth and instance masks for one frame by per-pixel ray
/// casting with a z-buffer over all primitives. Pixels with no hit get
/// invalid depth and label 0.
inline void render_frame(const SceneSpec& spec,
                         const std::vector<PlacedPrimitive>& placed,
                         const Pose& pose, int frame_index, DepthFrame* depth,
                         MaskFrame* mask, int threads = 1) {
  const Intrinsics& k = spec.intrinsics;
  depth->frame_index = frame_index;
  depth->width = k.width;
  depth->height = k.height;
  depth->values.assign(size_t(k.width) * k.height, -1.0f);
  depth->validity.assign(size_t(k.width) * k.height, 0);
  mask->frame_index = frame_index;
  mask->width = k.width;
  mask->height = k.height;
  mask->labels.assign(size_t(k.width) * k.height, 0);

  parallel_for(k.height, threads, [&](int y) {
    for (int x = 0; x < k.width; ++x) {
      Eigen::Vector3d origin, dir;
      pixel_ray(pose, k, Eigen::Vector2d(double(x), double(y)), &origin, &dir);
      const auto hit = cast_ray(placed, origin, dir);
      if (!hit) continue;
      const size_t idx = y * size_t(k.width) + x;
      depth->values[idx] = float(hit->depth);
      depth->validity[idx] = 1;
      mask->labels[idx] = placed[size_t(hit->primitive)].label;
    }
  });
}

}  // namespace scene4d
