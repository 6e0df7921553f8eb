#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "scene4d/cues/classify.hpp"
#include "scene4d/cues/cues.hpp"
#include "scene4d/cues/grid_tracks.hpp"
#include "scene4d/error.hpp"
#include "scene4d/geometry/trajectory.hpp"
#include "scene4d/io/pfm.hpp"
#include "scene4d/io/tum.hpp"
#include "scene4d/synth/render.hpp"
#include "scene4d/synth/scene.hpp"

namespace scene4d {

/// True 3D path of one tracklet, aligned with the bundle's tracklet of the
/// same id (points beyond the visibility mask are still filled where the
/// material point exists).
struct TrackTruth {
  int id = -1;
  int label = Tracklet::kUnlabeled;
  std::vector<std::optional<Eigen::Vector3d>> points;
};

struct GroundTruth {
  Trajectory trajectory;
  std::vector<DepthFrame> depth;
  std::vector<TrackTruth> tracks;
};

struct SynthResult {
  CueBundle bundle;
  GroundTruth truth;
};

namespace detail {

struct MaterialTrack {
  std::vector<std::optional<Eigen::Vector2d>> pixels;
  std::vector<std::optional<Eigen::Vector3d>> world;
};

inline std::string pixel_path_key(
    const std::vector<std::optional<Eigen::Vector2d>>& pixels) {
  std::string key;
  key.reserve(pixels.size() * 48);
  char buf[80];
  for (const auto& p : pixels) {
    if (p)
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g;", p->x(), p->y());
    else
      std::snprintf(buf, sizeof(buf), "_;");
    key += buf;
  }
  return key;
}

}  // namespace detail

/// Renders exact cues (depth, instance masks, grid-seeded tracklets) and the
/// matching ground truth for a synthetic scene. Deterministic for a given
/// spec; the rng seed only drives the separate corruption step.
inline SynthResult generate(const SceneSpec& spec, int threads = 1) {
  spec.validate();
  const int frames = spec.frame_count;
  const Intrinsics& k = spec.intrinsics;

  SynthResult result;
  result.truth.trajectory.intrinsics = k;
  result.bundle.init_intrinsics = k;

  std::vector<std::vector<PlacedPrimitive>> placed(frames);
  for (int t = 0; t < frames; ++t) {
    result.truth.trajectory.poses.push_back(spec.camera.pose_at(t, frames));
    placed[t] = place_primitives(spec, t);
  }

  result.bundle.depth.resize(frames);
  result.bundle.masks.resize(frames);
  for (int t = 0; t < frames; ++t)
    render_frame(spec, placed[t], result.truth.trajectory.poses[t], t,
                 &result.bundle.depth[t], &result.bundle.masks[t], threads);
  result.truth.depth = result.bundle.depth;

  bool any_hit = false;
  for (const DepthFrame& d : result.bundle.depth)
    for (char v : d.validity)
      if (v) {
        any_hit = true;
        break;
      }
  if (!any_hit) throw EmptyScene("generate: no primitive is ever visible");

  // material-point tracker: anchor a surface point at the seed, replay it
  // through the true motion, and test occlusion by exact re-raycast
  auto log = std::make_shared<std::vector<detail::MaterialTrack>>();
  const auto& poses = result.truth.trajectory.poses;
  TrackFn track = [&, log](const Eigen::Vector2d& seed_px,
                           int seed_frame) -> std::vector<std::optional<Eigen::Vector2d>> {
    detail::MaterialTrack mt;
    mt.pixels.assign(frames, std::nullopt);
    mt.world.assign(frames, std::nullopt);

    Eigen::Vector3d origin, dir;
    pixel_ray(poses[seed_frame], k, seed_px, &origin, &dir);
    const auto seed_hit = cast_ray(placed[seed_frame], origin, dir);
    if (seed_hit) {
      const int prim = seed_hit->primitive;
      const PlacedPrimitive& anchor = placed[seed_frame][size_t(prim)];
      const Eigen::Vector3d hit_world = origin + seed_hit->depth * dir;
      const Eigen::Vector3d local =
          (anchor.rot.transpose() * (hit_world - anchor.local_to_world.trans)) /
          anchor.scale;

      for (int t = 0; t < frames; ++t) {
        const PlacedPrimitive& at_t = placed[t][size_t(prim)];
        const Eigen::Vector3d world =
            at_t.rot * (local * at_t.scale) + at_t.local_to_world.trans;
        mt.world[t] = world;
        const Eigen::Vector3d cam = poses[t].apply(world);
        if (cam.z() <= kDepthEpsilon) continue;
        const Eigen::Vector2d px(k.fx * cam.x() / cam.z() + k.cx,
                                 k.fy * cam.y() / cam.z() + k.cy);
        if (px.x() < -0.5 || px.x() >= k.width - 0.5 || px.y() < -0.5 ||
            px.y() >= k.height - 0.5)
          continue;
        Eigen::Vector3d o2, d2;
        pixel_ray(poses[t], k, px, &o2, &d2);
        const auto vis = cast_ray(placed[t], o2, d2);
        if (!vis || vis->primitive != prim) continue;
        if (std::abs(vis->depth - cam.z()) > 1e-6 * std::max(1.0, cam.z()))
          continue;  // occluded by a nearer surface (possibly itself)
        mt.pixels[t] = px;
      }
    }
    log->push_back(mt);
    return mt.pixels;
  };

  const auto raw = grid_sample_tracklets(track, frames, k.width, k.height,
                                         spec.grid_n, spec.seed_every);

  // classification from the rendered masks; exact rasters need no dilation
  result.bundle.tracklets = classify_tracklets(raw, result.bundle.masks, 0);
  if (result.bundle.tracklets.empty())
    throw EmptyScene("generate: no usable tracklets");

  std::unordered_map<std::string, size_t> by_path;
  for (size_t i = 0; i < log->size(); ++i)
    by_path.emplace(detail::pixel_path_key((*log)[i].pixels), i);
  for (const Tracklet& tr : result.bundle.tracklets) {
    std::vector<std::optional<Eigen::Vector2d>> pixels(frames);
    for (int t = 0; t < frames; ++t)
      if (tr.visible_at(t)) pixels[size_t(t)] = tr.points[size_t(t)];
    const auto it = by_path.find(detail::pixel_path_key(pixels));
    if (it == by_path.end())
      throw Error("generate: lost the material track for tracklet " +
                  std::to_string(tr.id));
    TrackTruth truth;
    truth.id = tr.id;
    truth.label = tr.label;
    truth.points = (*log)[it->second].world;
    result.truth.tracks.push_back(std::move(truth));
  }

  result.bundle.validate();
  return result;
}

/// Writes the gt/ directory: true trajectory, true depth, and the true 3D
/// tracks of every dynamic tracklet.
inline void save_ground_truth(const GroundTruth& truth, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "depth");
  save_tum((fs::path(dir) / "trajectory.tum").string(), truth.trajectory.poses);
  char name[32];
  for (size_t t = 0; t < truth.depth.size(); ++t) {
    std::snprintf(name, sizeof(name), "%06zu.pfm", t);
    PfmImage img;
    img.width = truth.depth[t].width;
    img.height = truth.depth[t].height;
    img.values = truth.depth[t].values;
    write_pfm((fs::path(dir) / "depth" / name).string(), img);
  }
  std::ofstream out(fs::path(dir) / "dynamic_tracks.jsonl");
  if (!out) throw Error("cannot write " + dir + "/dynamic_tracks.jsonl");
  for (const TrackTruth& tr : truth.tracks) {
    if (tr.label <= 0) continue;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : tr.points) {
      if (p)
        pts.push_back({p->x(), p->y(), p->z()});
      else
        pts.push_back(nullptr);
    }
    out << nlohmann::json{{"id", tr.id}, {"label", tr.label}, {"points", pts}}
               .dump()
        << "\n";
  }
}

/// Reads gt/dynamic_tracks.jsonl back (for the eval command).
inline std::vector<TrackTruth> load_ground_truth_tracks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open " + path);
  std::vector<TrackTruth> tracks;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      TrackTruth tr;
      tr.id = j.at("id").get<int>();
      tr.label = j.at("label").get<int>();
      for (const auto& p : j.at("points")) {
        if (p.is_null())
          tr.points.push_back(std::nullopt);
        else
          tr.points.push_back(Eigen::Vector3d(
              p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()));
      }
      tracks.push_back(std::move(tr));
    } catch (const nlohmann::json::exception& e) {
      throw CorruptHeader(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return tracks;
}

}  // namespace scene4d
