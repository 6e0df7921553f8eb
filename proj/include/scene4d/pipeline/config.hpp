#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scene4d/energy/scene_state.hpp"
#include "scene4d/geometry/camera.hpp"
#include "scene4d/optim/adam.hpp"

namespace scene4d {

/// Everything the three-stage solver needs. The schedule defaults reproduce
/// the reference configuration: 600/2000/1000 iterations at learning rates
/// 1e-3/1e-2/1e-2 decaying to 1e-4, window of 5 frames, smoothness and
/// rigidity weights 10 and 100.
struct PipelineConfig {
  OptimSchedule stage1;
  OptimSchedule stage2;
  OptimSchedule stage3;
  int window = 5;
  int min_static_per_window = 8;
  int knn_k = 8;
  EnergyWeights weights;
  double grad_threshold = 0.05;
  double stage2_outlier_percentile = 0.90;
  double stage3_mad_multiplier = 3.0;
  bool run_stage1 = true;
  bool run_stage2 = true;
  bool run_stage3 = true;
  std::optional<Intrinsics> known_intrinsics;
  int threads = 1;
  uint64_t seed = 0;

  PipelineConfig() {
    stage1.max_iters = 600;
    stage1.lr_init = 1e-3;
    stage2.max_iters = 2000;
    stage2.lr_init = 1e-2;
    stage3.max_iters = 1000;
    stage3.lr_init = 1e-2;
  }

  void validate() const {
    stage1.validate();
    stage2.validate();
    stage3.validate();
    if (window < 2) throw Error("config: window must be >= 2");
    if (knn_k < 1) throw Error("config: knn_k must be >= 1");
    if (threads < 1) throw Error("config: threads must be >= 1");
    if (stage2_outlier_percentile <= 0 || stage2_outlier_percentile > 1)
      throw Error("config: stage2_outlier_percentile must be in (0,1]");
    if (stage3_mad_multiplier < 0)
      throw Error("config: stage3_mad_multiplier must be >= 0");
    if (known_intrinsics) known_intrinsics->validate();
  }
};

struct StageDiagnostics {
  std::string name;
  double final_loss = 0.0;
  int iterations = 0;
  size_t filtered = 0;
  double wall_ms = 0.0;
};

struct PipelineDiagnostics {
  std::vector<StageDiagnostics> stages;
  double total_wall_ms = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json stages_json = nlohmann::json::array();
    for (const StageDiagnostics& s : stages)
      stages_json.push_back({{"name", s.name},
                             {"final_loss", s.final_loss},
                             {"iterations", s.iterations},
                             {"filtered", s.filtered},
                             {"wall_ms", s.wall_ms}});
    return nlohmann::json{{"stages", stages_json},
                          {"total_wall_ms", total_wall_ms}};
  }
};

}  // namespace scene4d
