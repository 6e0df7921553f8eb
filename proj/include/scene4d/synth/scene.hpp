#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "scene4d/error.hpp"
#include "scene4d/geometry/camera.hpp"
#include "scene4d/geometry/pose.hpp"

namespace scene4d {

/// Finite primitive in its own local frame: a rect spans [-hx,hx]x[-hy,hy] in
/// the local z=0 plane, a box spans the centered cuboid with half extents
/// (hx,hy,hz). `rotvec`/`center` place the local frame in the world.
struct Primitive {
  enum class Type { kRect, kBox };
  Type type = Type::kRect;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotvec = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_extents = Eigen::Vector3d(1, 1, 1);  // z unused for rect
};

/// Rigid screw motion about the object's own center plus linear drift, or a
/// sinusoidal uniform scale pulse about the center (a non-rigid oracle).
struct Motion {
  enum class Kind { kNone, kRigid, kPulse };
  Kind kind = Kind::kNone;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitY();  // rigid
  double deg_per_frame = 0.0;                       // rigid
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // rigid, units/frame
  double amplitude = 0.0;  // pulse
  double frequency = 0.0;  // pulse, cycles/frame

  /// local->world pose of the carried primitive at frame t: the object spins
  /// about its own center and drifts linearly
  Pose pose_at(const Primitive& prim, int t) const {
    Pose base;
    base.rotvec = prim.rotvec;
    base.trans = prim.center;
    if (kind != Kind::kRigid) return base;
    if (axis.norm() <= 0) throw Error("motion: zero rotation axis");
    const double angle = deg_per_frame * M_PI / 180.0 * t;
    const Eigen::Matrix3d spin =
        rotvec_to_matrix(Eigen::Vector3d(axis.normalized() * angle));
    Pose out;
    out.rotvec = matrix_to_rotvec(spin * base.rotation());
    out.trans = prim.center + velocity * t;
    return out;
  }

  double scale_at(int t) const {
    if (kind != Kind::kPulse) return 1.0;
    return 1.0 + amplitude * std::sin(2.0 * M_PI * frequency * t);
  }
};

struct DynamicObject {
  Primitive primitive;
  Motion motion;
};

struct CameraPath {
  enum class Kind { kOrbit, kLine, kScrew };
  Kind kind = Kind::kOrbit;
  // orbit
  Eigen::Vector3d center = Eigen::Vector3d(0, 0, 6);
  double radius = 6.0;
  double span_deg = 40.0;
  double start_deg = 0.0;
  Eigen::Vector3d up = Eigen::Vector3d::UnitY();
  // line
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  Eigen::Vector3d end = Eigen::Vector3d::Zero();
  Eigen::Vector3d target = Eigen::Vector3d(0, 0, 6);
  // screw
  Eigen::Vector3d axis = Eigen::Vector3d::UnitY();
  double deg_per_frame = 0.0;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();

  /// world-to-camera pose for frame t of frame_count
  Pose pose_at(int t, int frame_count) const;
};

struct SceneSpec {
  int frame_count = 2;
  uint64_t seed = 0;
  int grid_n = 12;
  int seed_every = 8;
  Intrinsics intrinsics{60.0, 60.0, 31.5, 23.5, 64, 48};
  CameraPath camera;
  std::vector<Primitive> static_geometry;
  std::vector<DynamicObject> dynamic_objects;

  void validate() const {
    if (frame_count < 2) throw Error("scene spec: frame_count must be >= 2");
    if (grid_n < 2) throw Error("scene spec: grid_n must be >= 2");
    if (seed_every < 1) throw Error("scene spec: seed_every must be >= 1");
    intrinsics.validate();
    if (static_geometry.empty() && dynamic_objects.empty())
      throw EmptyScene("scene spec: no primitives");
  }
};

namespace detail {

/// Rows of the returned matrix are the camera axes in world coordinates.
inline Eigen::Matrix3d look_at_rotation(const Eigen::Vector3d& eye,
                                        const Eigen::Vector3d& target,
                                        const Eigen::Vector3d& up) {
  const Eigen::Vector3d z = (target - eye).normalized();
  Eigen::Vector3d x = up.cross(z);
  if (x.norm() < 1e-9) {
    // forward parallel to up: fall back to any perpendicular
    x = Eigen::Vector3d::UnitX().cross(z);
    if (x.norm() < 1e-9) x = Eigen::Vector3d::UnitY().cross(z);
  }
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.row(0) = x;
  r.row(1) = y;
  r.row(2) = z;
  return r;
}

inline Pose world_to_camera(const Eigen::Matrix3d& r, const Eigen::Vector3d& eye) {
  Pose p;
  p.rotvec = matrix_to_rotvec(r);
  p.trans = -(r * eye);
  return p;
}

}  // namespace detail

inline Pose CameraPath::pose_at(int t, int frame_count) const {
  const double u = frame_count > 1 ? double(t) / double(frame_count - 1) : 0.0;
  switch (kind) {
    case Kind::kOrbit: {
      const double a = (start_deg + span_deg * u) * M_PI / 180.0;
      const Eigen::Vector3d eye =
          center + radius * Eigen::Vector3d(std::sin(a), 0.0, -std::cos(a));
      return detail::world_to_camera(detail::look_at_rotation(eye, center, up),
                                     eye);
    }
    case Kind::kLine: {
      const Eigen::Vector3d eye = start + (end - start) * u;
      return detail::world_to_camera(detail::look_at_rotation(eye, target, up),
                                     eye);
    }
    case Kind::kScrew: {
      if (axis.norm() <= 0) throw Error("camera path: zero screw axis");
      const double angle = deg_per_frame * M_PI / 180.0 * t;
      const Eigen::Matrix3d r_c2w =
          rotvec_to_matrix(Eigen::Vector3d(axis.normalized() * angle));
      const Eigen::Vector3d eye = start + velocity * t;
      return detail::world_to_camera(r_c2w.transpose(), eye);
    }
  }
  throw Error("camera path: unknown kind");
}

// ---- JSON schema (synth.json) ----

namespace detail {

inline Eigen::Vector3d vec3_from_json(const nlohmann::json& j,
                                      const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw CorruptHeader("scene spec: '" + what + "' must be a 3-element array");
  return Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(),
                         j[2].get<double>());
}

inline Primitive primitive_from_json(const nlohmann::json& j) {
  Primitive p;
  const std::string type = j.at("type").get<std::string>();
  if (type == "rect") {
    p.type = Primitive::Type::kRect;
    const auto& he = j.at("half_extents");
    if (!he.is_array() || he.size() < 2)
      throw CorruptHeader("scene spec: rect half_extents needs 2 values");
    p.half_extents =
        Eigen::Vector3d(he[0].get<double>(), he[1].get<double>(), 0.0);
  } else if (type == "box") {
    p.type = Primitive::Type::kBox;
    p.half_extents = vec3_from_json(j.at("half_extents"), "half_extents");
  } else {
    throw CorruptHeader("scene spec: unknown primitive type '" + type + "'");
  }
  p.center = vec3_from_json(j.at("center"), "center");
  if (j.contains("rotvec")) p.rotvec = vec3_from_json(j.at("rotvec"), "rotvec");
  return p;
}

}  // namespace detail

inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  SceneSpec spec;
  spec.frame_count = j.at("frame_count").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<uint64_t>();
  if (j.contains("grid_n")) spec.grid_n = j.at("grid_n").get<int>();
  if (j.contains("seed_every")) spec.seed_every = j.at("seed_every").get<int>();
  if (j.contains("intrinsics")) {
    const auto& k = j.at("intrinsics");
    spec.intrinsics = Intrinsics{k.at("fx").get<double>(), k.at("fy").get<double>(),
                                 k.at("cx").get<double>(), k.at("cy").get<double>(),
                                 k.at("width").get<int>(), k.at("height").get<int>()};
  }
  if (j.contains("camera")) {
    const auto& c = j.at("camera");
    const std::string path = c.value("path", std::string("orbit"));
    auto& cam = spec.camera;
    if (path == "orbit") {
      cam.kind = CameraPath::Kind::kOrbit;
      if (c.contains("center")) cam.center = detail::vec3_from_json(c.at("center"), "camera.center");
      cam.radius = c.value("radius", cam.radius);
      cam.span_deg = c.value("span_deg", cam.span_deg);
      cam.start_deg = c.value("start_deg", cam.start_deg);
      if (c.contains("up")) cam.up = detail::vec3_from_json(c.at("up"), "camera.up");
    } else if (path == "line") {
      cam.kind = CameraPath::Kind::kLine;
      cam.start = detail::vec3_from_json(c.at("start"), "camera.start");
      cam.end = detail::vec3_from_json(c.at("end"), "camera.end");
      if (c.contains("target")) cam.target = detail::vec3_from_json(c.at("target"), "camera.target");
      if (c.contains("up")) cam.up = detail::vec3_from_json(c.at("up"), "camera.up");
    } else if (path == "screw") {
      cam.kind = CameraPath::Kind::kScrew;
      if (c.contains("start")) cam.start = detail::vec3_from_json(c.at("start"), "camera.start");
      if (c.contains("axis")) cam.axis = detail::vec3_from_json(c.at("axis"), "camera.axis");
      cam.deg_per_frame = c.value("deg_per_frame", 0.0);
      if (c.contains("velocity")) cam.velocity = detail::vec3_from_json(c.at("velocity"), "camera.velocity");
    } else {
      throw CorruptHeader("scene spec: unknown camera path '" + path + "'");
    }
  }
  for (const auto& g : j.value("static_geometry", nlohmann::json::array()))
    spec.static_geometry.push_back(detail::primitive_from_json(g));
  for (const auto& d : j.value("dynamic_objects", nlohmann::json::array())) {
    DynamicObject obj;
    obj.primitive = detail::primitive_from_json(d.at("primitive"));
    const auto& m = d.at("motion");
    const std::string kind = m.at("kind").get<std::string>();
    if (kind == "rigid") {
      obj.motion.kind = Motion::Kind::kRigid;
      if (m.contains("axis")) obj.motion.axis = detail::vec3_from_json(m.at("axis"), "motion.axis");
      obj.motion.deg_per_frame = m.value("deg_per_frame", 0.0);
      if (m.contains("velocity"))
        obj.motion.velocity = detail::vec3_from_json(m.at("velocity"), "motion.velocity");
    } else if (kind == "pulse") {
      obj.motion.kind = Motion::Kind::kPulse;
      obj.motion.amplitude = m.at("amplitude").get<double>();
      obj.motion.frequency = m.at("frequency").get<double>();
    } else if (kind == "none") {
      obj.motion.kind = Motion::Kind::kNone;
    } else {
      throw CorruptHeader("scene spec: unknown motion kind '" + kind + "'");
    }
    spec.dynamic_objects.push_back(obj);
  }
  spec.validate();
  return spec;
}

inline SceneSpec load_scene_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptHeader(path + ": " + e.what());
  }
  try {
    return scene_spec_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptHeader(path + ": " + e.what());
  }
}

}  // namespace scene4d
