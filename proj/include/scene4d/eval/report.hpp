#pragma once

#include <json.hpp>

namespace scene4d {

/// The CLI-facing metric bundle serialized as metrics.json.
struct MetricsReport {
  double ate = 0.0;
  double rpe_trans = 0.0;
  double rpe_rot = 0.0;
  double abs_rel = 0.0;
  double delta_125 = 0.0;
  double sc = 0.0;
  double delta_sc_001 = 0.0;
  double delta_sc_005 = 0.0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"ate", ate},
                          {"rpe_trans", rpe_trans},
                          {"rpe_rot", rpe_rot},
                          {"abs_rel", abs_rel},
                          {"delta_125", delta_125},
                          {"sc", sc},
                          {"delta_sc_001", delta_sc_001},
                          {"delta_sc_005", delta_sc_005}};
  }
};

}  // namespace scene4d
