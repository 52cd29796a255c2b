#pragma once

#include "roboface/motion_net.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace roboface {

struct TrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  int epochs = 200;
  int batch_size = 16;
  double dropout_rate = 0.1;
  double mouth_weight = 1.0;
  std::uint64_t seed = 0;
  /// Per-sample gradients are spread over this many threads and summed in
  /// sample order, so the result does not depend on it.
  unsigned workers = 1;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  /// Mean per-sample loss of the epoch's training passes (dropout active).
  double train_loss = 0.0;
  /// Mean per-sample eval-mode loss on the validation set, if one was given.
  std::optional<double> val_loss;
};

struct TrainResult {
  ModelParams params;
  AdamState adam;
  std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// AdamW over shuffled mini-batches. Shuffling and dropout masks come from one
/// generator seeded with config.seed, so equal inputs give bitwise-equal runs.
/// `resume` continues from saved moments when its sizes match.
TrainResult train(const ModelParams& init, const LbsRig& human_rig,
                  const std::vector<TrainingSample>& train_set,
                  const std::vector<TrainingSample>& val_set, const TrainConfig& config,
                  const AdamState* resume = nullptr, const EpochCallback& on_epoch = {});

/// Mean eval-mode loss over `samples`.
double evaluate_loss(const ModelParams& params, const HumanDecoder& decoder,
                     const std::vector<TrainingSample>& samples, double mouth_weight);

/// One AdamW update with bias correction and decoupled weight decay.
void adamw_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient, AdamState& state,
                const TrainConfig& config);

}  // namespace roboface
