#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "scene4d/cues/bundle_io.hpp"
#include "scene4d/io/pfm.hpp"
#include "scene4d/io/ply.hpp"
#include "scene4d/io/tum.hpp"
#include "scene4d/pipeline/densify.hpp"
#include "scene4d/pipeline/stages.hpp"

namespace scene4d {

namespace detail {

using PipelineClock = std::chrono::steady_clock;

inline double ms_since(PipelineClock::time_point t0) {
  return std::chrono::duration<double, std::milli>(PipelineClock::now() - t0)
      .count();
}

}  // namespace detail

/// Runs the configured stages in order (1 -> 2 -> 3 -> densify -> fuse).
/// Skipped solver stages leave their part of the state at initialization:
/// without stage 1 the trajectory is all-identity, without stage 2 there are
/// no static points, without stage 3 no dynamic trajectories. Any stage
/// failure is rethrown with the stage name; `progress`, if given, then holds
/// the diagnostics of the stages that completed.
inline SceneSolution run_pipeline(const CueBundle& bundle,
                                  const PipelineConfig& cfg,
                                  PipelineDiagnostics* progress = nullptr) {
  cfg.validate();
  bundle.validate();

  PipelineDiagnostics diags;
  auto publish = [&] {
    if (progress) *progress = diags;
  };
  const auto t_total = detail::PipelineClock::now();

  Trajectory traj;
  if (cfg.run_stage1) {
    StageDiagnostics d;
    const auto t0 = detail::PipelineClock::now();
    try {
      traj = stage1_init(bundle, cfg, &d);
    } catch (const NonFiniteLoss& e) {
      publish();
      throw NonFiniteLoss("stage1: " + std::string(e.what()));
    }
    d.wall_ms = detail::ms_since(t0);
    diags.stages.push_back(std::move(d));
    publish();
  } else {
    traj.intrinsics =
        cfg.known_intrinsics ? *cfg.known_intrinsics : bundle.init_intrinsics;
    traj.poses.assign(bundle.frame_count(), Pose{});
  }

  StaticPointSet statics;
  if (cfg.run_stage2) {
    StageDiagnostics d;
    const auto t0 = detail::PipelineClock::now();
    try {
      std::tie(traj, statics) = stage2_ba(bundle, traj, cfg, &d);
    } catch (const NonFiniteLoss& e) {
      publish();
      throw NonFiniteLoss("stage2: " + std::string(e.what()));
    }
    d.wall_ms = detail::ms_since(t0);
    diags.stages.push_back(std::move(d));
    publish();
  }

  DynamicTrajectorySet dyn;
  if (cfg.run_stage3) {
    StageDiagnostics d;
    const auto t0 = detail::PipelineClock::now();
    try {
      dyn = stage3_nrba(bundle, traj, cfg, &d);
    } catch (const NonFiniteLoss& e) {
      publish();
      throw NonFiniteLoss("stage3: " + std::string(e.what()));
    }
    d.wall_ms = detail::ms_since(t0);
    diags.stages.push_back(std::move(d));
    publish();
  }

  StageDiagnostics ddens;
  ddens.name = "densify";
  auto t0 = detail::PipelineClock::now();
  const DensifyResult aligned = densify(bundle, traj, statics, dyn, cfg.threads);
  for (const std::vector<char>& frame : aligned.supported)
    for (char c : frame) ddens.filtered += c == 0;  // unsupported pixel count
  ddens.wall_ms = detail::ms_since(t0);
  diags.stages.push_back(std::move(ddens));
  publish();

  StageDiagnostics dfuse;
  dfuse.name = "fuse";
  t0 = detail::PipelineClock::now();
  SceneSolution sol =
      fuse(bundle, traj, aligned, cfg.grad_threshold, statics, dyn, cfg.threads);
  for (const std::vector<char>& frame : sol.edge_masks)
    for (char c : frame) dfuse.filtered += c != 0;  // edge pixel count
  dfuse.wall_ms = detail::ms_since(t0);
  diags.stages.push_back(std::move(dfuse));

  diags.total_wall_ms = detail::ms_since(t_total);
  publish();
  sol.diagnostics = std::move(diags);
  return sol;
}

/// Deterministic color per instance label; label 0 (static) is gray.
inline Rgb label_color(uint16_t label) {
  static constexpr uint8_t kPalette[][3] = {
      {180, 180, 180}, {230, 80, 60},  {70, 160, 230}, {90, 200, 90},
      {240, 180, 50},  {170, 90, 220}, {80, 210, 200}, {240, 130, 180}};
  const uint8_t* c = kPalette[label % 8];
  return {c[0], c[1], c[2]};
}

/// Writes the solution to `dir`: trajectory.tum, intrinsics.json, static.ply,
/// one dynamic_%06d.ply per frame (when dynamic points exist),
/// fused_depth/*.pfm with invalid pixels kept non-positive, and
/// diagnostics.json. `extra`, if not null, is merged into diagnostics.json
/// (the CLI passes the effective configuration).
inline void save_solution(const SceneSolution& sol, const std::string& dir,
                          const nlohmann::json* extra = nullptr) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "fused_depth");

  save_tum((fs::path(dir) / "trajectory.tum").string(), sol.trajectory.poses);

  {
    const Intrinsics& K = sol.trajectory.intrinsics;
    nlohmann::json j;
    j["fx"] = K.fx;
    j["fy"] = K.fy;
    j["cx"] = K.cx;
    j["cy"] = K.cy;
    j["width"] = K.width;
    j["height"] = K.height;
    std::ofstream out(fs::path(dir) / "intrinsics.json");
    if (!out) throw Error("save_solution: cannot write intrinsics.json");
    out << j.dump(2) << "\n";
  }

  {
    std::vector<Rgb> colors(sol.static_cloud.size(), label_color(0));
    write_ply((fs::path(dir) / "static.ply").string(), sol.static_cloud,
              colors);
  }

  if (!sol.dyn_trajectories.trajectories.empty()) {
    const int frames = static_cast<int>(sol.trajectory.poses.size());
    for (int t = 0; t < frames; ++t) {
      std::vector<Eigen::Vector3f> pts;
      std::vector<Rgb> colors;
      for (const auto& [id, tr] : sol.dyn_trajectories.trajectories) {
        if (!tr.valid_at(t)) continue;
        pts.push_back(tr.points[t].cast<float>());
        colors.push_back(label_color(static_cast<uint16_t>(
            sol.dyn_trajectories.instance_of.at(id))));
      }
      write_ply(
          (fs::path(dir) / detail::frame_file(t, "ply").insert(0, "dynamic_"))
              .string(),
          pts, colors);
    }
  }

  for (const DepthFrame& d : sol.fused_depth) {
    PfmImage img;
    img.width = d.width;
    img.height = d.height;
    img.values.resize(d.values.size());
    for (size_t i = 0; i < d.values.size(); ++i)
      img.values[i] = d.validity[i] ? d.values[i]
                      : (d.values[i] > 0 ? -1.0f : d.values[i]);
    write_pfm((fs::path(dir) / "fused_depth" /
               detail::frame_file(d.frame_index, "pfm"))
                  .string(),
              img);
  }

  {
    nlohmann::json j = sol.diagnostics.to_json();
    if (extra) j.update(*extra);
    std::ofstream out(fs::path(dir) / "diagnostics.json");
    if (!out) throw Error("save_solution: cannot write diagnostics.json");
    out << j.dump(2) << "\n";
  }
}

}  // namespace scene4d
