#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "alrn/dataset.hpp"
#include "alrn/model.hpp"
#include "alrn/objective.hpp"
#include "alrn/rng.hpp"

namespace alrn {

// Optimizer and schedule settings. The first pretrain_epochs epochs
// train the attribute kernels with the adapter frozen; the remaining
// epochs train everything.
struct TrainConfig {
  ModelConfig model;
  LossConfig loss;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 1e-5;
  int episode_classes = 16;   // classes per episode
  int shots_per_class = 2;    // training samples per sampled class
  int batches_per_epoch = 300;
  int epochs = 20;
  int pretrain_epochs = 5;
  std::uint64_t seed = 0;
};

// Momentum buffers, one per parameter buffer and in the same order.
struct OptimizerState {
  std::vector<std::vector<double>> velocity;
};

OptimizerState init_optimizer_state(ParameterSet& params);

// Classical momentum with decoupled-free L2 decay folded into the
// gradient: v <- momentum*v + g + wd*theta; theta <- theta - lr*v.
// Adapter buffers are skipped entirely (no decay, velocity untouched)
// when include_adapter is false.
void sgd_step(ParameterSet& params, const GradientSet& grads, OptimizerState& state,
              double learning_rate, double momentum, double weight_decay,
              bool include_adapter);

// One episode: episode_classes distinct seen classes, shots_per_class
// training samples each, drawn without replacement.
struct Episode {
  std::vector<int> sample_indices;  // into dataset.samples
  std::vector<int> labels;          // global class ids
};

Episode sample_episode(const Dataset& dataset, int episode_classes, int shots_per_class,
                       Rng& rng);

struct EpochRecord {
  int epoch = 0;
  TrainStage stage = TrainStage::kKernelsOnly;
  double mean_total = 0.0;
  double mean_cross_entropy = 0.0;
  double mean_mse = 0.0;
  double wall_seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  ParameterSet params;
  TrainLog log;
};

// Full schedule from fresh Glorot parameters. Deterministic for a
// fixed config: one rng stream initializes parameters, a second drives
// episode sampling across all epochs. Throws NumericError naming the
// epoch and batch if a loss turns non-finite.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

// per_epoch is invoked after every epoch with the record just added.
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& per_epoch);

}  // namespace alrn
