#pragma once

#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/cues/cues.hpp"

namespace scene4d {

/// Tracks one seed pixel (given at seed_frame) across the whole sequence.
/// Returns one entry per frame; nullopt marks frames where the point is not
/// visible. Provided by the synth module's scene oracle or by adapters around
/// pre-tracked data.
using TrackFn = std::function<std::vector<std::optional<Eigen::Vector2d>>(
    const Eigen::Vector2d& seed_px, int seed_frame)>;

/// Seeds a grid_n x grid_n uniform pixel grid on frame 0 and every `every`-th
/// frame after it, tracks each seed over the sequence, and deduplicates
/// trajectories that are identical after quantization to 1e-6 px.
inline std::vector<Tracklet> grid_sample_tracklets(const TrackFn& track,
                                                   int frames, int width,
                                                   int height, int grid_n,
                                                   int every) {
  if (grid_n < 2) throw Error("grid_sample_tracklets: grid_n must be >= 2");
  if (every < 1) throw Error("grid_sample_tracklets: every must be >= 1");

  std::vector<Tracklet> out;
  std::unordered_set<std::string> seen;
  for (int seed_frame = 0; seed_frame < frames; seed_frame += every) {
    for (int gy = 0; gy < grid_n; ++gy) {
      for (int gx = 0; gx < grid_n; ++gx) {
        const Eigen::Vector2d seed(gx * (width - 1.0) / (grid_n - 1.0),
                                   gy * (height - 1.0) / (grid_n - 1.0));
        const auto path = track(seed, seed_frame);
        if (static_cast<int>(path.size()) != frames)
          throw DimensionMismatch("track oracle returned wrong length");

        Tracklet tr;
        tr.points.resize(frames, Eigen::Vector2d::Zero());
        tr.visibility.assign(frames, 0);
        std::string key;
        key.reserve(frames * 24);
        char buf[64];
        for (int t = 0; t < frames; ++t) {
          if (path[t].has_value()) {
            tr.points[t] = *path[t];
            tr.visibility[t] = 1;
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f;", path[t]->x(),
                          path[t]->y());
          } else {
            std::snprintf(buf, sizeof(buf), "_;");
          }
          key += buf;
        }
        if (tr.visible_count() < 2) continue;
        if (!seen.insert(key).second) continue;  // duplicate trajectory
        tr.id = static_cast<int>(out.size());
        out.push_back(std::move(tr));
      }
    }
  }
  return out;
}

}  // namespace scene4d
