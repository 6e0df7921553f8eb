#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scene4d/error.hpp"

namespace scene4d {

/// One named, flat group of optimization variables. Frozen blocks receive no
/// updates and no Adam state changes.
struct ParamBlock {
  std::string name;
  Eigen::VectorXd values;
  bool frozen = false;
};

struct OptimSchedule {
  int max_iters = 1000;
  double lr_init = 1e-2;
  double lr_min = 1e-4;
  int plateau_patience = 50;
  double plateau_factor = 0.5;
  int early_stop_patience = 150;
  double early_stop_min_delta = 1e-6;
  std::string history_csv;  // empty = no CSV output

  void validate() const {
    if (lr_min > lr_init) throw Error("schedule: lr_min > lr_init");
    if (plateau_patience < 1 || early_stop_patience < 1)
      throw Error("schedule: patience must be >= 1");
    if (!(plateau_factor > 0 && plateau_factor < 1))
      throw Error("schedule: plateau_factor must be in (0,1)");
    if (max_iters < 1) throw Error("schedule: max_iters must be >= 1");
  }
};

struct HistoryEntry {
  int iter = 0;
  double loss = 0;
  double lr = 0;
};

struct MinimizeResult {
  std::vector<ParamBlock> blocks;  // best-so-far parameters
  std::vector<HistoryEntry> history;
  double best_loss = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::string stop_reason;
};

/// Objective: evaluates the loss at `blocks`; when `grads` is non-null it is
/// resized to match and filled with the gradient of every block (frozen
/// blocks' entries are ignored).
using Objective = std::function<double(const std::vector<ParamBlock>& blocks,
                                       std::vector<Eigen::VectorXd>* grads)>;

/// Full-batch Adam with reduce-on-plateau and early stopping. Deterministic:
/// there is no stochastic sampling, so `seed` has no effect on the result and
/// exists only to pin the call signature; every run with equal inputs yields
/// an identical history. Returns the best-so-far parameters, not the last
/// iterate.
inline MinimizeResult minimize(const Objective& objective,
                               std::vector<ParamBlock> blocks,
                               const OptimSchedule& schedule,
                               unsigned seed = 0) {
  (void)seed;
  schedule.validate();
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double adam_eps = 1e-8;

  std::vector<Eigen::VectorXd> m(blocks.size()), v(blocks.size());
  for (size_t b = 0; b < blocks.size(); ++b) {
    m[b] = Eigen::VectorXd::Zero(blocks[b].values.size());
    v[b] = Eigen::VectorXd::Zero(blocks[b].values.size());
  }

  std::ofstream csv;
  if (!schedule.history_csv.empty()) {
    csv.open(schedule.history_csv);
    if (!csv) throw Error("minimize: cannot open " + schedule.history_csv);
    csv << "iter,loss,lr\n";
  }

  MinimizeResult result;
  result.blocks = blocks;
  double lr = schedule.lr_init;
  double early_best = std::numeric_limits<double>::infinity();
  double plateau_best = std::numeric_limits<double>::infinity();
  int early_bad = 0;
  int plateau_bad = 0;
  int steps = 0;
  std::vector<Eigen::VectorXd> grads;

  for (int iter = 0; iter < schedule.max_iters; ++iter) {
    const double loss = objective(blocks, &grads);
    if (!std::isfinite(loss))
      throw NonFiniteLoss("minimize: non-finite loss at iteration " +
                          std::to_string(iter));
    result.history.push_back({iter, loss, lr});
    if (csv.is_open()) {
      char line[96];
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", iter, loss, lr);
      csv << line;
    }
    result.iterations = iter + 1;
    if (loss < result.best_loss) {
      result.best_loss = loss;
      result.blocks = blocks;
    }

    // early stopping, checked before the plateau rule
    if (loss < early_best - schedule.early_stop_min_delta) {
      early_best = loss;
      early_bad = 0;
    } else if (++early_bad >= schedule.early_stop_patience) {
      result.stop_reason = "early_stop";
      return result;
    }

    if (loss < plateau_best - schedule.early_stop_min_delta) {
      plateau_best = loss;
      plateau_bad = 0;
    } else if (++plateau_bad >= schedule.plateau_patience) {
      if (lr <= schedule.lr_min) {
        result.stop_reason = "lr_floor";
        return result;
      }
      lr = std::max(lr * schedule.plateau_factor, schedule.lr_min);
      plateau_bad = 0;
    }

    if (grads.size() != blocks.size())
      throw DimensionMismatch("minimize: objective returned " +
                              std::to_string(grads.size()) + " gradients for " +
                              std::to_string(blocks.size()) + " blocks");
    ++steps;
    const double bc1 = 1.0 - std::pow(beta1, steps);
    const double bc2 = 1.0 - std::pow(beta2, steps);
    for (size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].frozen) continue;
      if (grads[b].size() != blocks[b].values.size())
        throw DimensionMismatch("minimize: gradient size mismatch for block '" +
                                blocks[b].name + "'");
      m[b] = beta1 * m[b] + (1.0 - beta1) * grads[b];
      v[b] = beta2 * v[b] + (1.0 - beta2) * grads[b].cwiseProduct(grads[b]);
      const Eigen::VectorXd mhat = m[b] / bc1;
      const Eigen::VectorXd vhat = v[b] / bc2;
      blocks[b].values.array() -=
          lr * mhat.array() / (vhat.array().sqrt() + adam_eps);
      if (!blocks[b].values.allFinite())
        throw NonFiniteLoss("minimize: block '" + blocks[b].name +
                            "' non-finite at iteration " +
                            std::to_string(iter));
    }
  }
  result.stop_reason = "max_iters";
  return result;
}

}  // namespace scene4d
