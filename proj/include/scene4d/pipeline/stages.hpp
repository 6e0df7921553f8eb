#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "scene4d/cues/cues.hpp"
#include "scene4d/cues/sampling.hpp"
#include "scene4d/energy/camera_smoothness.hpp"
#include "scene4d/energy/motion.hpp"
#include "scene4d/energy/reprojection.hpp"
#include "scene4d/geometry/trajectory.hpp"
#include "scene4d/pipeline/config.hpp"

namespace scene4d {

namespace detail {

inline Eigen::VectorXd pack_poses(const Trajectory& traj, int first, int last) {
  Eigen::VectorXd x(6 * (last - first));
  for (int t = first; t < last; ++t) {
    x.segment<3>(6 * (t - first)) = traj.poses[t].rotvec;
    x.segment<3>(6 * (t - first) + 3) = traj.poses[t].trans;
  }
  return x;
}

inline void unpack_poses(const Eigen::VectorXd& x, int first, int last,
                         Trajectory* traj) {
  for (int t = first; t < last; ++t) {
    traj->poses[t].rotvec = x.segment<3>(6 * (t - first));
    traj->poses[t].trans = x.segment<3>(6 * (t - first) + 3);
  }
}

inline Eigen::VectorXd flatten_pose_grad(const SceneGrad& g, int first,
                                         int last) {
  Eigen::VectorXd out(6 * (last - first));
  for (int t = first; t < last; ++t) out.segment<6>(6 * (t - first)) = g.pose[t];
  return out;
}

inline void add_weighted_poses(SceneGrad* dst, const SceneGrad& src, double w) {
  for (size_t t = 0; t < dst->pose.size(); ++t) dst->pose[t] += w * src.pose[t];
}

inline void add_weighted_dyn(SceneGrad* dst, const SceneGrad& src, double w,
                             int frames) {
  for (const auto& [id, gs] : src.dyn_points) {
    auto& gd = dst->dyn_grad(id, frames);
    for (int t = 0; t < frames; ++t) gd[t] += w * gs[t];
  }
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Stage 1: window-by-window camera initialization. Slides a window of
/// `cfg.window` frames with stride 1 over the sequence, minimizing the
/// depth-reprojection consistency energy over the window's poses and the
/// shared focal lengths. Later windows start from the already-optimized
/// overlap; each newly entering frame starts at its predecessor's pose.
/// Frame 0 is pinned to the identity to fix the gauge.
inline Trajectory stage1_init(const CueBundle& bundle,
                              const PipelineConfig& cfg,
                              StageDiagnostics* diag = nullptr) {
  const int frames = bundle.frame_count();
  const int ws = std::min(cfg.window, frames);

  Trajectory traj;
  traj.intrinsics =
      cfg.known_intrinsics ? *cfg.known_intrinsics : bundle.init_intrinsics;
  traj.poses.assign(frames, Pose{});

  // every window needs static support before any optimization runs; a
  // tracklet only constrains the window if it is seen at least twice there
  for (int w = 0; w + ws <= frames; ++w) {
    int usable = 0;
    for (const Tracklet& tr : bundle.tracklets) {
      if (!tr.is_static()) continue;
      int seen = 0;
      for (int t = w; t < w + ws && seen < 2; ++t) seen += tr.visible_at(t);
      if (seen >= 2) ++usable;
    }
    if (usable < cfg.min_static_per_window)
      throw InsufficientStaticTracks(
          "stage1: frames [" + std::to_string(w) + ", " +
          std::to_string(w + ws) + ") see only " + std::to_string(usable) +
          " static tracklets, need " +
          std::to_string(cfg.min_static_per_window));
  }

  const bool freeze_focal = cfg.known_intrinsics.has_value();
  int total_iters = 0;
  for (int w = 0; w + ws <= frames; ++w) {
    const int first = std::max(w, 1);
    const int last = w + ws;
    if (w > 0) traj.poses[last - 1] = traj.poses[last - 2];
    if (first >= last) continue;

    std::vector<ParamBlock> blocks;
    blocks.push_back({"poses", detail::pack_poses(traj, first, last), false});
    Eigen::VectorXd focal(2);
    focal << traj.intrinsics.fx, traj.intrinsics.fy;
    blocks.push_back({"focal", focal, freeze_focal});

    auto objective = [&](const std::vector<ParamBlock>& b,
                         std::vector<Eigen::VectorXd>* grads) {
      detail::unpack_poses(b[0].values, first, last, &traj);
      traj.intrinsics.fx = b[1].values[0];
      traj.intrinsics.fy = b[1].values[1];
      SceneGrad g;
      SceneGrad* gp = nullptr;
      if (grads) {
        g.resize_poses(frames);
        gp = &g;
      }
      const double loss = e_init(traj, bundle.depth, bundle.tracklets,
                                 cfg.window, gp, nullptr, w, last);
      if (grads) {
        grads->resize(2);
        (*grads)[0] = detail::flatten_pose_grad(g, first, last);
        (*grads)[1] = Eigen::Vector2d(g.fx, g.fy);
      }
      return loss;
    };

    const MinimizeResult res = minimize(objective, blocks, cfg.stage1);
    detail::unpack_poses(res.blocks[0].values, first, last, &traj);
    traj.intrinsics.fx = res.blocks[1].values[0];
    traj.intrinsics.fy = res.blocks[1].values[1];
    total_iters += res.iterations;
  }

  if (diag) {
    diag->name = "stage1";
    diag->iterations = total_iters;
    diag->final_loss = e_init(traj, bundle.depth, bundle.tracklets, cfg.window);
  }
  return traj;
}

/// Stage 2: global bundle adjustment over poses, focal lengths, and one 3D
/// point per static tracklet (initialized by unprojecting the tracklet's
/// depth at its first visible frame). Minimizes the static reprojection
/// energy plus the weighted camera smoothness term. Afterwards, points whose
/// mean reprojection residual exceeds the 90th-percentile threshold are
/// dropped; survivors keep their optimized values.
inline std::pair<Trajectory, StaticPointSet> stage2_ba(
    const CueBundle& bundle, const Trajectory& init, const PipelineConfig& cfg,
    StageDiagnostics* diag = nullptr) {
  const int frames = bundle.frame_count();
  Trajectory traj = init;
  StaticPointSet pts;
  for (const Tracklet& tr : bundle.tracklets) {
    if (!tr.is_static()) continue;
    for (int t = 0; t < frames; ++t) {
      if (!tr.visible_at(t)) continue;
      const auto z = sample_depth_bilinear(bundle.depth[t], tr.points[t]);
      if (!z || !(*z > 0)) continue;
      pts.points[tr.id] =
          unproject(tr.points[t], *z, traj.poses[t], traj.intrinsics);
      break;
    }
  }
  if (pts.points.empty())
    throw InsufficientStaticTracks(
        "stage2: no static point could be initialized from depth");

  std::vector<int> ids;
  ids.reserve(pts.points.size());
  for (const auto& [id, p] : pts.points) ids.push_back(id);

  std::vector<ParamBlock> blocks;
  blocks.push_back({"poses", detail::pack_poses(traj, 1, frames), false});
  Eigen::VectorXd focal(2);
  focal << traj.intrinsics.fx, traj.intrinsics.fy;
  blocks.push_back({"focal", focal, cfg.known_intrinsics.has_value()});
  Eigen::VectorXd pvec(3 * static_cast<int>(ids.size()));
  for (size_t i = 0; i < ids.size(); ++i)
    pvec.segment<3>(3 * i) = pts.points[ids[i]];
  blocks.push_back({"points", pvec, false});

  auto apply = [&](const std::vector<ParamBlock>& b) {
    detail::unpack_poses(b[0].values, 1, frames, &traj);
    traj.intrinsics.fx = b[1].values[0];
    traj.intrinsics.fy = b[1].values[1];
    for (size_t i = 0; i < ids.size(); ++i)
      pts.points[ids[i]] = b[2].values.segment<3>(3 * i);
  };

  auto objective = [&](const std::vector<ParamBlock>& b,
                       std::vector<Eigen::VectorXd>* grads) {
    apply(b);
    SceneGrad g;
    SceneGrad* gp = nullptr;
    if (grads) {
      g.resize_poses(frames);
      gp = &g;
    }
    double loss = e_ba(traj, pts, bundle.tracklets, cfg.weights.huber_delta,
                       nullptr, gp, nullptr);
    if (cfg.weights.w_cam != 0) {
      SceneGrad gc;
      SceneGrad* gcp = nullptr;
      if (grads) {
        gc.resize_poses(frames);
        gcp = &gc;
      }
      loss += cfg.weights.w_cam * e_cam(traj, cfg.weights.epsilon_cam, gcp);
      if (grads) detail::add_weighted_poses(&g, gc, cfg.weights.w_cam);
    }
    if (grads) {
      grads->resize(3);
      (*grads)[0] = detail::flatten_pose_grad(g, 1, frames);
      (*grads)[1] = Eigen::Vector2d(g.fx, g.fy);
      Eigen::VectorXd gpts = Eigen::VectorXd::Zero(3 * ids.size());
      for (size_t i = 0; i < ids.size(); ++i) {
        const auto it = g.static_points.find(ids[i]);
        if (it != g.static_points.end()) gpts.segment<3>(3 * i) = it->second;
      }
      (*grads)[2] = std::move(gpts);
    }
    return loss;
  };

  const MinimizeResult res = minimize(objective, blocks, cfg.stage2);
  apply(res.blocks);

  // outlier cut on mean per-point residual (behind-camera penalties included,
  // so points that drifted behind a camera get culled first)
  std::vector<ResidualRecord> records;
  e_ba(traj, pts, bundle.tracklets, cfg.weights.huber_delta, &records);
  std::map<int, std::pair<double, int>> acc;
  for (const ResidualRecord& r : records) {
    auto& a = acc[r.tracklet_id];
    a.first += r.value;
    a.second += 1;
  }
  size_t dropped = 0;
  if (!acc.empty()) {
    std::vector<double> means;
    means.reserve(acc.size());
    for (const auto& [id, a] : acc) means.push_back(a.first / a.second);
    std::sort(means.begin(), means.end());
    const size_t idx = static_cast<size_t>(std::floor(
        cfg.stage2_outlier_percentile * (static_cast<double>(means.size()) - 1)));
    const double threshold = means[idx];
    for (const auto& [id, a] : acc)
      if (a.first / a.second > threshold) {
        pts.points.erase(id);
        ++dropped;
      }
  }

  if (diag) {
    diag->name = "stage2";
    diag->iterations = res.iterations;
    diag->final_loss = res.best_loss;
    diag->filtered = dropped;
  }
  return {std::move(traj), std::move(pts)};
}

/// K nearest same-instance neighbors by 3D distance at the earliest frame
/// where both trajectories are valid. k is clamped to instance size - 1.
/// Ties break on the lower tracklet id.
inline void build_knn(DynamicTrajectorySet* dyn, int k) {
  dyn->neighbors.clear();
  std::map<int, std::vector<int>> groups;
  for (const auto& [id, tr] : dyn->trajectories)
    groups[dyn->instance_of.at(id)].push_back(id);

  for (const auto& [inst, members] : groups) {
    for (int a : members) {
      const DynTrajectory& ta = dyn->trajectories.at(a);
      std::vector<std::pair<double, int>> cand;
      for (int b : members) {
        if (b == a) continue;
        const DynTrajectory& tb = dyn->trajectories.at(b);
        const int frames = static_cast<int>(
            std::min(ta.points.size(), tb.points.size()));
        int t0 = -1;
        for (int t = 0; t < frames; ++t)
          if (ta.valid_at(t) && tb.valid_at(t)) {
            t0 = t;
            break;
          }
        if (t0 < 0) continue;
        cand.emplace_back((ta.points[t0] - tb.points[t0]).norm(), b);
      }
      std::sort(cand.begin(), cand.end());
      std::vector<int>& nb = dyn->neighbors[a];
      const int take = std::min<int>(k, static_cast<int>(cand.size()));
      nb.reserve(take);
      for (int i = 0; i < take; ++i) nb.push_back(cand[i].second);
    }
  }
}

/// Stage 3: non-rigid refinement of per-frame dynamic points with the camera
/// frozen. Points are initialized by unprojecting each visible dynamic sample
/// with its depth and the stage-2 pose; the objective is the dynamic
/// reprojection energy plus weighted motion smoothness and local rigidity.
/// Afterwards, samples whose residual exceeds median + 3*MAD are invalidated.
/// Sequences without dynamic tracklets yield an empty set.
inline DynamicTrajectorySet stage3_nrba(const CueBundle& bundle,
                                        const Trajectory& traj,
                                        const PipelineConfig& cfg,
                                        StageDiagnostics* diag = nullptr) {
  const int frames = bundle.frame_count();
  if (diag) diag->name = "stage3";

  DynamicTrajectorySet dyn;
  for (const Tracklet& tr : bundle.tracklets) {
    if (!tr.is_dynamic()) continue;
    DynTrajectory d;
    d.points.assign(frames, Eigen::Vector3d::Zero());
    d.validity.assign(frames, 0);
    int valid = 0;
    for (int t = 0; t < frames; ++t) {
      if (!tr.visible_at(t)) continue;
      const auto z = sample_depth_bilinear(bundle.depth[t], tr.points[t]);
      if (!z || !(*z > 0)) continue;
      d.points[t] = unproject(tr.points[t], *z, traj.poses[t], traj.intrinsics);
      d.validity[t] = 1;
      ++valid;
    }
    if (valid == 0) continue;
    dyn.trajectories.emplace(tr.id, std::move(d));
    dyn.instance_of[tr.id] = tr.label;
  }
  if (dyn.trajectories.empty()) return dyn;

  build_knn(&dyn, cfg.knn_k);

  std::vector<std::pair<int, int>> slots;  // (tracklet id, frame)
  for (const auto& [id, d] : dyn.trajectories)
    for (int t = 0; t < frames; ++t)
      if (d.valid_at(t)) slots.emplace_back(id, t);

  Eigen::VectorXd x(3 * static_cast<int>(slots.size()));
  for (size_t i = 0; i < slots.size(); ++i)
    x.segment<3>(3 * i) =
        dyn.trajectories.at(slots[i].first).points[slots[i].second];
  std::vector<ParamBlock> blocks{{"dyn", std::move(x), false}};

  auto apply = [&](const Eigen::VectorXd& v) {
    for (size_t i = 0; i < slots.size(); ++i)
      dyn.trajectories.at(slots[i].first).points[slots[i].second] =
          v.segment<3>(3 * i);
  };

  auto objective = [&](const std::vector<ParamBlock>& b,
                       std::vector<Eigen::VectorXd>* grads) {
    apply(b[0].values);
    SceneGrad g;
    SceneGrad* gp = grads ? &g : nullptr;
    double loss = e_nr(traj, dyn, bundle.tracklets, cfg.weights.huber_delta,
                       nullptr, gp);
    {
      SceneGrad gw;
      SceneGrad* gwp = grads ? &gw : nullptr;
      loss += cfg.weights.w_smooth * e_smooth(dyn, gwp);
      if (grads) detail::add_weighted_dyn(&g, gw, cfg.weights.w_smooth, frames);
    }
    {
      SceneGrad ga;
      SceneGrad* gap = grads ? &ga : nullptr;
      loss += cfg.weights.w_arap * e_arap(dyn, gap);
      if (grads) detail::add_weighted_dyn(&g, ga, cfg.weights.w_arap, frames);
    }
    if (grads) {
      grads->resize(1);
      Eigen::VectorXd gv = Eigen::VectorXd::Zero(3 * slots.size());
      for (size_t i = 0; i < slots.size(); ++i) {
        const auto it = g.dyn_points.find(slots[i].first);
        if (it != g.dyn_points.end())
          gv.segment<3>(3 * i) = it->second[slots[i].second];
      }
      (*grads)[0] = std::move(gv);
    }
    return loss;
  };

  const MinimizeResult res = minimize(objective, blocks, cfg.stage3);
  apply(res.blocks[0].values);

  // energy-based outlier cut: residuals past median + 3*MAD are invalidated
  std::vector<ResidualRecord> records;
  e_nr(traj, dyn, bundle.tracklets, cfg.weights.huber_delta, &records);
  size_t invalidated = 0;
  if (!records.empty()) {
    std::vector<double> vals;
    vals.reserve(records.size());
    for (const ResidualRecord& r : records) vals.push_back(r.value);
    const double med = detail::median_of(vals);
    std::vector<double> dev;
    dev.reserve(vals.size());
    for (double v : vals) dev.push_back(std::abs(v - med));
    const double threshold =
        med + cfg.stage3_mad_multiplier * detail::median_of(std::move(dev));
    for (const ResidualRecord& r : records)
      if (r.value > threshold) {
        dyn.trajectories.at(r.tracklet_id).validity[r.frame] = 0;
        ++invalidated;
      }
  }

  if (diag) {
    diag->iterations = res.iterations;
    diag->final_loss = res.best_loss;
    diag->filtered = invalidated;
  }
  return dyn;
}

}  // namespace scene4d
