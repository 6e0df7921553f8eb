#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "scene4d/energy/scene_state.hpp"

namespace scene4d {

/// Temporal smoothness: sum of displacement norms between consecutive valid
/// samples of each dynamic trajectory.
inline double e_smooth(const DynamicTrajectorySet& dyn,
                       SceneGrad* grad = nullptr) {
  double energy = 0.0;
  for (const auto& [id, tr] : dyn.trajectories) {
    const int frames = static_cast<int>(tr.points.size());
    for (int t = 0; t + 1 < frames; ++t) {
      if (!tr.valid_at(t) || !tr.valid_at(t + 1)) continue;
      const Eigen::Vector3d delta = tr.points[t] - tr.points[t + 1];
      const double r = delta.norm();
      energy += r;
      if (grad && r > 0) {
        const Eigen::Vector3d u = delta / r;
        auto& g = grad->dyn_grad(id, frames);
        g[t] += u;
        g[t + 1] -= u;
      }
    }
  }
  return energy;
}

/// Local rigidity: for each directed KNN pair within one instance, penalize
/// the change of point-to-point distance between consecutive frames. A pair
/// contributes at frame t only if all four endpoint samples are valid.
inline double e_arap(const DynamicTrajectorySet& dyn,
                     SceneGrad* grad = nullptr) {
  double energy = 0.0;
  for (const auto& [k, nbrs] : dyn.neighbors) {
    const auto kit = dyn.trajectories.find(k);
    if (kit == dyn.trajectories.end()) continue;
    const DynTrajectory& pk = kit->second;
    const int frames = static_cast<int>(pk.points.size());
    for (int m : nbrs) {
      const auto mit = dyn.trajectories.find(m);
      if (mit == dyn.trajectories.end()) continue;
      const DynTrajectory& pm = mit->second;
      for (int t = 0; t + 1 < frames; ++t) {
        if (!pk.valid_at(t) || !pk.valid_at(t + 1) || !pm.valid_at(t) ||
            !pm.valid_at(t + 1))
          continue;
        const Eigen::Vector3d a = pk.points[t] - pm.points[t];
        const Eigen::Vector3d b = pk.points[t + 1] - pm.points[t + 1];
        const double da = a.norm();
        const double db = b.norm();
        const double delta = da - db;
        energy += std::abs(delta);
        if (!grad || delta == 0.0) continue;

        const double s = delta > 0 ? 1.0 : -1.0;
        auto& gk = grad->dyn_grad(k, frames);
        auto& gm = grad->dyn_grad(m, frames);
        if (da > 0) {
          const Eigen::Vector3d ua = a / da;
          gk[t] += s * ua;
          gm[t] -= s * ua;
        }
        if (db > 0) {
          const Eigen::Vector3d ub = b / db;
          gk[t + 1] -= s * ub;
          gm[t + 1] += s * ub;
        }
      }
    }
  }
  return energy;
}

}  // namespace scene4d
