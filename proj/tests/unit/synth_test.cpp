#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/energy/camera_smoothness.hpp"
#include "scene4d/energy/motion.hpp"
#include "scene4d/energy/reprojection.hpp"
#include "scene4d/error.hpp"
#include "scene4d/geometry/camera.hpp"
#include "scene4d/synth/corrupt.hpp"
#include "scene4d/synth/generate.hpp"
#include "scene4d/synth/render.hpp"
#include "scene4d/synth/rng.hpp"
#include "scene4d/synth/scene.hpp"

using namespace scene4d;

namespace {

SceneSpec static_camera_scene() {
  SceneSpec spec;
  spec.frame_count = 4;
  spec.grid_n = 10;
  spec.seed_every = 2;
  spec.camera.kind = CameraPath::Kind::kScrew;
  spec.camera.start = Eigen::Vector3d::Zero();
  spec.camera.deg_per_frame = 0.0;
  spec.camera.velocity = Eigen::Vector3d::Zero();
  Primitive rect;
  rect.type = Primitive::Type::kRect;
  rect.center = Eigen::Vector3d(0, 0, 8);
  rect.half_extents = Eigen::Vector3d(6, 4.5, 0);
  spec.static_geometry.push_back(rect);
  DynamicObject box;
  box.primitive.type = Primitive::Type::kBox;
  box.primitive.center = Eigen::Vector3d(0.8, 0.3, 5);
  box.primitive.half_extents = Eigen::Vector3d(0.7, 0.7, 0.7);
  box.motion.kind = Motion::Kind::kNone;
  spec.dynamic_objects.push_back(box);
  return spec;
}

SceneSpec orbit_plane_scene() {
  SceneSpec spec;
  spec.frame_count = 6;
  spec.grid_n = 8;
  spec.seed_every = 3;
  spec.camera.kind = CameraPath::Kind::kOrbit;
  spec.camera.center = Eigen::Vector3d(0, 0, 8);
  spec.camera.radius = 8.0;
  spec.camera.span_deg = 30.0;
  spec.camera.start_deg = -15.0;
  Primitive rect;
  rect.type = Primitive::Type::kRect;
  rect.center = Eigen::Vector3d(0, 0, 8);
  rect.half_extents = Eigen::Vector3d(7, 5, 0);
  spec.static_geometry.push_back(rect);
  return spec;
}

SceneSpec rigid_cube_scene() {
  SceneSpec spec;
  spec.frame_count = 8;
  spec.grid_n = 12;
  spec.seed_every = 4;
  spec.camera.kind = CameraPath::Kind::kLine;
  spec.camera.start = Eigen::Vector3d(-0.4, 0, 0);
  spec.camera.end = Eigen::Vector3d(0.4, 0, 0);
  spec.camera.target = Eigen::Vector3d(0, 0, 6);
  Primitive rect;
  rect.type = Primitive::Type::kRect;
  rect.center = Eigen::Vector3d(0, 0, 9);
  rect.half_extents = Eigen::Vector3d(7, 5, 0);
  spec.static_geometry.push_back(rect);
  DynamicObject box;
  box.primitive.type = Primitive::Type::kBox;
  box.primitive.center = Eigen::Vector3d(-0.6, 0.4, 5.5);
  box.primitive.half_extents = Eigen::Vector3d(0.6, 0.6, 0.6);
  box.motion.kind = Motion::Kind::kRigid;
  box.motion.axis = Eigen::Vector3d(0, 1, 0);
  box.motion.deg_per_frame = 3.0;
  box.motion.velocity = Eigen::Vector3d(0.03, 0.0, 0.0);
  spec.dynamic_objects.push_back(box);
  return spec;
}

const Tracklet* find_tracklet(const CueBundle& bundle, int id) {
  for (const Tracklet& t : bundle.tracklets)
    if (t.id == id) return &t;
  return nullptr;
}

DynamicTrajectorySet dyn_from_truth(const SynthResult& sr) {
  const int frames = sr.bundle.frame_count();
  DynamicTrajectorySet dyn;
  for (const TrackTruth& tt : sr.truth.tracks) {
    if (tt.label <= 0) continue;
    const Tracklet* tr = find_tracklet(sr.bundle, tt.id);
    REQUIRE(tr != nullptr);
    DynTrajectory d;
    d.points.assign(frames, Eigen::Vector3d::Zero());
    d.validity.assign(frames, 0);
    for (int t = 0; t < frames; ++t) {
      if (tr->visible_at(t) && tt.points[size_t(t)]) {
        d.points[size_t(t)] = *tt.points[size_t(t)];
        d.validity[size_t(t)] = 1;
      }
    }
    dyn.trajectories[tt.id] = std::move(d);
    dyn.instance_of[tt.id] = tt.label;
  }
  for (const auto& [a, ia] : dyn.instance_of)
    for (const auto& [b, ib] : dyn.instance_of)
      if (a != b && ia == ib) dyn.neighbors[a].push_back(b);
  return dyn;
}

}  // namespace

TEST_CASE("generation is deterministic", "[synth]") {
  const auto a = generate(rigid_cube_scene());
  const auto b = generate(rigid_cube_scene());
  REQUIRE(a.bundle.tracklets.size() == b.bundle.tracklets.size());
  for (size_t i = 0; i < a.bundle.tracklets.size(); ++i) {
    REQUIRE(a.bundle.tracklets[i].points == b.bundle.tracklets[i].points);
    REQUIRE(a.bundle.tracklets[i].visibility == b.bundle.tracklets[i].visibility);
    REQUIRE(a.bundle.tracklets[i].label == b.bundle.tracklets[i].label);
  }
  for (size_t f = 0; f < a.bundle.depth.size(); ++f) {
    REQUIRE(a.bundle.depth[f].values == b.bundle.depth[f].values);
    REQUIRE(a.bundle.masks[f].labels == b.bundle.masks[f].labels);
  }
}

TEST_CASE("rendering is thread-count independent", "[synth]") {
  const auto spec = rigid_cube_scene();
  const auto placed = place_primitives(spec, 3);
  const Pose pose = spec.camera.pose_at(3, spec.frame_count);
  DepthFrame d1, d4;
  MaskFrame m1, m4;
  render_frame(spec, placed, pose, 3, &d1, &m1, 1);
  render_frame(spec, placed, pose, 3, &d4, &m4, 4);
  REQUIRE(d1.values == d4.values);
  REQUIRE(m1.labels == m4.labels);
}

TEST_CASE("orbit plane: tracklets reproject exactly under true poses", "[synth]") {
  const auto sr = generate(orbit_plane_scene());
  REQUIRE(sr.bundle.tracklets.size() > 20);
  const Intrinsics& k = sr.truth.trajectory.intrinsics;

  size_t checked = 0;
  for (const TrackTruth& tt : sr.truth.tracks) {
    REQUIRE(tt.label == Tracklet::kStaticLabel);
    const Tracklet* tr = find_tracklet(sr.bundle, tt.id);
    REQUIRE(tr != nullptr);
    for (int t = 0; t < sr.bundle.frame_count(); ++t) {
      if (!tr->visible_at(t)) continue;
      REQUIRE(tt.points[size_t(t)].has_value());
      const Eigen::Vector2d px =
          project(*tt.points[size_t(t)], sr.truth.trajectory.poses[size_t(t)], k);
      REQUIRE((px - tr->points[size_t(t)]).norm() < 1e-9);
      ++checked;
    }
  }
  REQUIRE(checked > 100);

  // all-static scene: masks contain no instance labels
  for (const MaskFrame& m : sr.bundle.masks)
    for (uint16_t l : m.labels) REQUIRE(l == 0);
}

TEST_CASE("rendered depth equals the projected depth of the tracked surface point",
          "[synth]") {
  const auto sr = generate(orbit_plane_scene());
  const Intrinsics& k = sr.truth.trajectory.intrinsics;
  // where a tracklet sits on an integer pixel, the rendered depth must equal
  // the camera-frame z of the true surface point
  size_t exact_hits = 0;
  for (const TrackTruth& tt : sr.truth.tracks) {
    const Tracklet* tr = find_tracklet(sr.bundle, tt.id);
    for (int t = 0; t < sr.bundle.frame_count(); ++t) {
      if (!tr->visible_at(t)) continue;
      const Eigen::Vector2d px = tr->points[size_t(t)];
      const double rx = std::round(px.x()), ry = std::round(px.y());
      if (std::abs(px.x() - rx) > 1e-9 || std::abs(px.y() - ry) > 1e-9) continue;
      const Eigen::Vector3d cam =
          sr.truth.trajectory.poses[size_t(t)].apply(*tt.points[size_t(t)]);
      const double rendered = sr.bundle.depth[size_t(t)].at(int(rx), int(ry));
      REQUIRE(std::abs(rendered - cam.z()) < 1e-5 * cam.z());
      ++exact_hits;
    }
  }
  REQUIRE(exact_hits > 10);  // the seed frames guarantee integer-pixel samples
}

TEST_CASE("rigid cube: pairwise distances of true dynamic tracks are constant",
          "[synth]") {
  const auto sr = generate(rigid_cube_scene());
  std::vector<const TrackTruth*> cube;
  for (const TrackTruth& tt : sr.truth.tracks)
    if (tt.label == 1) cube.push_back(&tt);
  REQUIRE(cube.size() >= 4);

  for (size_t i = 0; i < cube.size(); ++i)
    for (size_t j = i + 1; j < cube.size(); ++j) {
      const double d0 = (*cube[i]->points[0] - *cube[j]->points[0]).norm();
      for (int t = 1; t < sr.bundle.frame_count(); ++t) {
        const double dt =
            (*cube[i]->points[size_t(t)] - *cube[j]->points[size_t(t)]).norm();
        REQUIRE(std::abs(dt - d0) < 1e-9);
      }
    }

  const auto dyn = dyn_from_truth(sr);
  REQUIRE(e_arap(dyn) < 1e-9);
}

TEST_CASE("occlusion: plane tracklets hidden exactly where the box blocks the ray",
          "[synth]") {
  SceneSpec spec;
  spec.frame_count = 3;
  spec.grid_n = 14;
  spec.seed_every = 1;
  spec.camera.kind = CameraPath::Kind::kLine;
  spec.camera.start = Eigen::Vector3d(-0.8, 0, 0);
  spec.camera.end = Eigen::Vector3d(0.8, 0, 0);
  spec.camera.target = Eigen::Vector3d(0, 0, 8);
  Primitive rect;
  rect.type = Primitive::Type::kRect;
  rect.center = Eigen::Vector3d(0, 0, 8);
  rect.half_extents = Eigen::Vector3d(6, 4, 0);
  spec.static_geometry.push_back(rect);
  Primitive blocker;
  blocker.type = Primitive::Type::kBox;
  blocker.center = Eigen::Vector3d(0, 0, 4);
  blocker.half_extents = Eigen::Vector3d(0.9, 0.9, 0.9);
  spec.static_geometry.push_back(blocker);

  const auto sr = generate(spec);
  const Intrinsics& k = sr.truth.trajectory.intrinsics;

  // independent slab test for segment camera-center -> plane point
  auto segment_hits_box = [&](const Eigen::Vector3d& c, const Eigen::Vector3d& p,
                              double* margin) {
    const Eigen::Vector3d d = p - c;
    double near = 0.0, far = 1.0;
    *margin = 1e18;
    for (int a = 0; a < 3; ++a) {
      const double lo = blocker.center(a) - 0.9, hi = blocker.center(a) + 0.9;
      if (std::abs(d(a)) < 1e-15) {
        *margin = std::min(*margin, std::min(std::abs(c(a) - lo), std::abs(c(a) - hi)));
        if (c(a) < lo || c(a) > hi) return false;
        continue;
      }
      double t1 = (lo - c(a)) / d(a), t2 = (hi - c(a)) / d(a);
      if (t1 > t2) std::swap(t1, t2);
      near = std::max(near, t1);
      far = std::min(far, t2);
    }
    *margin = std::min(*margin, std::abs(far - near));
    return near < far && far > 0 && near < 1;
  };

  size_t occluded_seen = 0, visible_seen = 0;
  for (const TrackTruth& tt : sr.truth.tracks) {
    if (std::abs((*tt.points[0]).z() - 8.0) > 1e-9) continue;  // not on the plane
    const Tracklet* tr = find_tracklet(sr.bundle, tt.id);
    for (int t = 0; t < spec.frame_count; ++t) {
      const Pose& pose = sr.truth.trajectory.poses[size_t(t)];
      const Eigen::Vector3d p = *tt.points[size_t(t)];
      const Eigen::Vector3d cam = pose.apply(p);
      if (cam.z() <= 1e-6) continue;
      const Eigen::Vector2d px(k.fx * cam.x() / cam.z() + k.cx,
                               k.fy * cam.y() / cam.z() + k.cy);
      if (px.x() < -0.5 || px.x() >= k.width - 0.5 || px.y() < -0.5 ||
          px.y() >= k.height - 0.5)
        continue;
      double margin = 0.0;
      const bool blocked = segment_hits_box(camera_center(pose), p, &margin);
      if (margin < 1e-6) continue;  // grazing the silhouette, skip ties
      CAPTURE(tt.id, t, p.x(), p.y(), blocked);
      REQUIRE(tr->visible_at(t) == !blocked);
      (blocked ? occluded_seen : visible_seen) += 1;
    }
  }
  REQUIRE(occluded_seen > 5);
  REQUIRE(visible_seen > 50);
}

TEST_CASE("master consistency: every energy term is zero at ground truth",
          "[synth]") {
  const auto sr = generate(static_camera_scene());
  const int frames = sr.bundle.frame_count();
  const Trajectory& traj = sr.truth.trajectory;

  bool saw_dynamic_label = false;
  for (const MaskFrame& m : sr.bundle.masks)
    for (uint16_t l : m.labels)
      if (l == 1) saw_dynamic_label = true;
  REQUIRE(saw_dynamic_label);

  StaticPointSet statics;
  size_t n_static = 0, n_dynamic = 0;
  for (const TrackTruth& tt : sr.truth.tracks) {
    if (tt.label == Tracklet::kStaticLabel) {
      statics.points[tt.id] = *tt.points[0];
      ++n_static;
    } else {
      ++n_dynamic;
    }
  }
  REQUIRE(n_static >= 8);
  REQUIRE(n_dynamic >= 4);
  const auto dyn = dyn_from_truth(sr);

  int behind = 0;
  REQUIRE(e_ba(traj, statics, sr.bundle.tracklets, 0.0, nullptr, nullptr,
               &behind) < 1e-9);
  REQUIRE(behind == 0);
  REQUIRE(e_nr(traj, dyn, sr.bundle.tracklets, 0.0, nullptr, nullptr, &behind) <
          1e-9);
  REQUIRE(behind == 0);
  REQUIRE(e_init(traj, sr.bundle.depth, sr.bundle.tracklets, 5) < 1e-12);
  REQUIRE(e_cam(traj) == 0.0);
  REQUIRE(e_smooth(dyn) == 0.0);
  REQUIRE(e_arap(dyn) == 0.0);
  (void)frames;
}

TEST_CASE("zero corruption is a byte-exact identity", "[synth]") {
  const auto sr = generate(rigid_cube_scene());
  CorruptionTrace trace;
  const CueBundle out = corrupt(sr.bundle, CorruptionSpec{}, 99, &trace);

  REQUIRE(out.tracklets.size() == sr.bundle.tracklets.size());
  for (size_t i = 0; i < out.tracklets.size(); ++i) {
    REQUIRE(out.tracklets[i].points == sr.bundle.tracklets[i].points);
    REQUIRE(out.tracklets[i].visibility == sr.bundle.tracklets[i].visibility);
  }
  for (size_t f = 0; f < out.depth.size(); ++f) {
    REQUIRE(out.depth[f].values == sr.bundle.depth[f].values);
    REQUIRE(out.depth[f].validity == sr.bundle.depth[f].validity);
    REQUIRE(out.masks[f].labels == sr.bundle.masks[f].labels);
  }
  REQUIRE(trace.dropped_samples == 0);
  REQUIRE(trace.invalidated_pixels == 0);
}

TEST_CASE("scale jitter: per-frame depth ratio matches the drawn scale", "[synth]") {
  const auto sr = generate(rigid_cube_scene());
  CorruptionSpec cspec;
  cspec.depth_scale_jitter_sigma = 0.05;
  CorruptionTrace trace;
  const CueBundle out = corrupt(sr.bundle, cspec, 1234, &trace);
  REQUIRE(trace.depth_scales.size() == out.depth.size());

  for (size_t f = 0; f < out.depth.size(); ++f) {
    std::vector<double> ratios;
    for (size_t i = 0; i < out.depth[f].values.size(); ++i)
      if (out.depth[f].validity[i] && sr.bundle.depth[f].validity[i])
        ratios.push_back(double(out.depth[f].values[i]) /
                         double(sr.bundle.depth[f].values[i]));
    REQUIRE(ratios.size() > 100);
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2,
                     ratios.end());
    const double median = ratios[ratios.size() / 2];
    // the corrupted raster is float32, so each ratio carries up to half an
    // ulp (~6e-8 relative) of rounding; the drawn double is recovered to that
    REQUIRE(std::abs(median - trace.depth_scales[f]) <
            4e-7 * trace.depth_scales[f]);
    REQUIRE(std::abs(trace.depth_scales[f] - 1.0) < 0.3);
  }
  // distinct frames draw distinct scales
  REQUIRE(trace.depth_scales[0] != trace.depth_scales[1]);
}

TEST_CASE("track corruption: noise perturbs and dropout removes", "[synth]") {
  const auto sr = generate(rigid_cube_scene());

  SECTION("noise stays in bounds and moves points") {
    CorruptionSpec cspec;
    cspec.track_noise_sigma_px = 0.5;
    const CueBundle out = corrupt(sr.bundle, cspec, 7);
    REQUIRE_NOTHROW(out.validate());
    double total_shift = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < out.tracklets.size(); ++i)
      for (size_t t = 0; t < out.tracklets[i].points.size(); ++t)
        if (out.tracklets[i].visibility[t]) {
          total_shift +=
              (out.tracklets[i].points[t] - sr.bundle.tracklets[i].points[t]).norm();
          ++n;
        }
    REQUIRE(n > 0);
    REQUIRE(total_shift / double(n) > 0.1);
  }

  SECTION("full dropout removes every tracklet") {
    CorruptionSpec cspec;
    cspec.track_dropout_rate = 1.0;
    CorruptionTrace trace;
    const CueBundle out = corrupt(sr.bundle, cspec, 7, &trace);
    REQUIRE(out.tracklets.empty());
    REQUIRE(trace.dropped_tracklets == sr.bundle.tracklets.size());
    REQUIRE_NOTHROW(out.validate());
  }

  SECTION("determinism per seed") {
    CorruptionSpec cspec;
    cspec.track_noise_sigma_px = 0.5;
    cspec.depth_scale_jitter_sigma = 0.05;
    cspec.track_dropout_rate = 0.05;
    const CueBundle a = corrupt(sr.bundle, cspec, 42);
    const CueBundle b = corrupt(sr.bundle, cspec, 42);
    REQUIRE(a.tracklets.size() == b.tracklets.size());
    for (size_t i = 0; i < a.tracklets.size(); ++i)
      REQUIRE(a.tracklets[i].points == b.tracklets[i].points);
    for (size_t f = 0; f < a.depth.size(); ++f)
      REQUIRE(a.depth[f].values == b.depth[f].values);
    const CueBundle c = corrupt(sr.bundle, cspec, 43);
    bool any_diff = false;
    for (size_t f = 0; f < a.depth.size() && !any_diff; ++f)
      any_diff = a.depth[f].values != c.depth[f].values;
    REQUIRE(any_diff);
  }
}

TEST_CASE("mask opening removes a thin protrusion and keeps the core", "[synth]") {
  // hand-built raster: 5x5 solid block of label 1 with a 1px finger
  CueBundle bundle;
  bundle.init_intrinsics = Intrinsics{10, 10, 4.5, 4.5, 12, 12};
  for (int f = 0; f < 2; ++f) {
    DepthFrame d;
    d.frame_index = f;
    d.width = d.height = 12;
    d.values.assign(144, 5.0f);
    d.validity.assign(144, 1);
    bundle.depth.push_back(d);
    MaskFrame m;
    m.frame_index = f;
    m.width = m.height = 12;
    m.labels.assign(144, 0);
    for (int y = 2; y <= 6; ++y)
      for (int x = 2; x <= 6; ++x) m.labels[size_t(y) * 12 + x] = 1;
    m.labels[size_t(4) * 12 + 9] = 1;  // isolated finger pixel
    bundle.masks.push_back(m);
  }
  Tracklet t0;
  t0.id = 0;
  t0.label = Tracklet::kStaticLabel;
  t0.points = {Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)};
  t0.visibility = {1, 1};
  bundle.tracklets.push_back(t0);

  CorruptionSpec cspec;
  cspec.mask_erode_dilate_px = 1;
  const CueBundle out = corrupt(bundle, cspec, 0);

  // brute-force oracle: erode then dilate with the same structuring element
  const MaskFrame& in = bundle.masks[0];
  auto label_at = [&](int x, int y) {
    return (x >= 0 && x < 12 && y >= 0 && y < 12) ? in.labels[size_t(y) * 12 + x]
                                                  : uint16_t(0);
  };
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) {
      bool any_eroded_near = false;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          bool all_one = true;
          for (int ey = -1; ey <= 1 && all_one; ++ey)
            for (int ex = -1; ex <= 1 && all_one; ++ex)
              all_one = label_at(x + dx + ex, y + dy + ey) == 1;
          if (all_one) any_eroded_near = true;
        }
      const uint16_t expected =
          (label_at(x, y) == 1 && any_eroded_near) ? 1 : 0;
      CAPTURE(x, y);
      REQUIRE(out.masks[0].labels[size_t(y) * 12 + x] == expected);
    }
  // the finger is gone, the core survives
  REQUIRE(out.masks[0].labels[size_t(4) * 12 + 9] == 0);
  REQUIRE(out.masks[0].labels[size_t(4) * 12 + 4] == 1);
}

TEST_CASE("scene spec json parsing", "[synth]") {
  const auto j = nlohmann::json::parse(R"({
    "frame_count": 5,
    "seed": 11,
    "grid_n": 6,
    "seed_every": 2,
    "intrinsics": {"fx": 50, "fy": 52, "cx": 31.5, "cy": 23.5, "width": 64, "height": 48},
    "camera": {"path": "orbit", "center": [0,0,7], "radius": 7, "span_deg": 25, "start_deg": -12.5},
    "static_geometry": [
      {"type": "rect", "center": [0,0,9], "rotvec": [0,0,0], "half_extents": [6,4]}
    ],
    "dynamic_objects": [
      {"primitive": {"type": "box", "center": [0,0,5], "half_extents": [0.5,0.5,0.5]},
       "motion": {"kind": "rigid", "axis": [0,1,0], "deg_per_frame": 2, "velocity": [0.01,0,0]}}
    ]
  })");
  const SceneSpec spec = scene_spec_from_json(j);
  REQUIRE(spec.frame_count == 5);
  REQUIRE(spec.seed == 11);
  REQUIRE(spec.intrinsics.fy == 52.0);
  REQUIRE(spec.camera.kind == CameraPath::Kind::kOrbit);
  REQUIRE(spec.camera.radius == 7.0);
  REQUIRE(spec.static_geometry.size() == 1);
  REQUIRE(spec.static_geometry[0].half_extents.x() == 6.0);
  REQUIRE(spec.dynamic_objects.size() == 1);
  REQUIRE(spec.dynamic_objects[0].motion.deg_per_frame == 2.0);

  REQUIRE_NOTHROW(generate(spec));

  SECTION("bad specs are rejected") {
    auto bad = j;
    bad["frame_count"] = 1;
    REQUIRE_THROWS_AS(scene_spec_from_json(bad), Error);
    auto bad2 = j;
    bad2["static_geometry"][0]["type"] = "sphere";
    REQUIRE_THROWS_AS(scene_spec_from_json(bad2), CorruptHeader);
    auto bad3 = j;
    bad3["camera"]["path"] = "spline";
    REQUIRE_THROWS_AS(scene_spec_from_json(bad3), CorruptHeader);
  }
}

TEST_CASE("empty or invisible scenes are rejected", "[synth]") {
  SceneSpec empty;
  empty.frame_count = 3;
  REQUIRE_THROWS_AS(generate(empty), EmptyScene);

  SceneSpec behind = orbit_plane_scene();
  behind.static_geometry[0].center = Eigen::Vector3d(0, 0, -50);
  REQUIRE_THROWS_AS(generate(behind), EmptyScene);
}

TEST_CASE("pulse deformation produces a non-rigid but trackable object", "[synth]") {
  SceneSpec spec = static_camera_scene();
  spec.frame_count = 9;
  spec.dynamic_objects[0].motion.kind = Motion::Kind::kPulse;
  spec.dynamic_objects[0].motion.amplitude = 0.1;
  spec.dynamic_objects[0].motion.frequency = 0.25;

  const auto sr = generate(spec);
  const Intrinsics& k = sr.truth.trajectory.intrinsics;

  // reprojection still exact
  for (const TrackTruth& tt : sr.truth.tracks) {
    const Tracklet* tr = find_tracklet(sr.bundle, tt.id);
    for (int t = 0; t < spec.frame_count; ++t) {
      if (!tr->visible_at(t)) continue;
      const Eigen::Vector2d px =
          project(*tt.points[size_t(t)], sr.truth.trajectory.poses[size_t(t)], k);
      REQUIRE((px - tr->points[size_t(t)]).norm() < 1e-9);
    }
  }

  // but distances between cube points now change over time
  std::vector<const TrackTruth*> cube;
  for (const TrackTruth& tt : sr.truth.tracks)
    if (tt.label == 1) cube.push_back(&tt);
  REQUIRE(cube.size() >= 2);
  double max_change = 0.0;
  for (size_t i = 0; i + 1 < cube.size(); ++i) {
    const double d0 = (*cube[i]->points[0] - *cube[i + 1]->points[0]).norm();
    for (int t = 1; t < spec.frame_count; ++t)
      max_change = std::max(
          max_change,
          std::abs((*cube[i]->points[size_t(t)] - *cube[i + 1]->points[size_t(t)])
                       .norm() -
                   d0));
  }
  REQUIRE(max_change > 1e-3);

  const auto dyn = dyn_from_truth(sr);
  REQUIRE(e_arap(dyn) > 1e-3);
}

TEST_CASE("ground truth round trips through the gt directory", "[synth]") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "scene4d_gt_test";
  fs::remove_all(dir);
  const auto sr = generate(rigid_cube_scene());
  save_ground_truth(sr.truth, dir.string());

  REQUIRE(fs::exists(dir / "trajectory.tum"));
  REQUIRE(fs::exists(dir / "depth" / "000000.pfm"));
  const auto poses = load_tum((dir / "trajectory.tum").string());
  REQUIRE(poses.size() == sr.truth.trajectory.poses.size());
  for (size_t t = 0; t < poses.size(); ++t) {
    REQUIRE((poses[t].rotvec - sr.truth.trajectory.poses[t].rotvec).norm() < 1e-9);
    REQUIRE((poses[t].trans - sr.truth.trajectory.poses[t].trans).norm() < 1e-9);
  }

  const auto tracks = load_ground_truth_tracks((dir / "dynamic_tracks.jsonl").string());
  size_t expected = 0;
  for (const TrackTruth& tt : sr.truth.tracks)
    if (tt.label > 0) ++expected;
  REQUIRE(tracks.size() == expected);
  REQUIRE(expected >= 4);
  for (const TrackTruth& tt : tracks) {
    const TrackTruth* src = nullptr;
    for (const TrackTruth& cand : sr.truth.tracks)
      if (cand.id == tt.id) src = &cand;
    REQUIRE(src != nullptr);
    for (size_t t = 0; t < tt.points.size(); ++t) {
      REQUIRE(tt.points[t].has_value() == src->points[t].has_value());
      if (tt.points[t])
        REQUIRE((*tt.points[t] - *src->points[t]).norm() < 1e-12);
    }
  }
  fs::remove_all(dir);
}
