#include "alrn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <unordered_map>

namespace alrn {

OptimizerState init_optimizer_state(ParameterSet& params) {
  OptimizerState state;
  for (const auto& ref : parameter_buffers(params))
    state.velocity.emplace_back(ref.values->size(), 0.0);
  return state;
}

void sgd_step(ParameterSet& params, const GradientSet& grads, OptimizerState& state,
              double learning_rate, double momentum, double weight_decay,
              bool include_adapter) {
  auto p_refs = parameter_buffers(params);
  auto g_refs = parameter_buffers(static_cast<const ParameterSet&>(grads));
  check_shape(p_refs.size() == g_refs.size() && state.velocity.size() == p_refs.size(),
              "optimizer buffer count mismatch");
  for (std::size_t r = 0; r < p_refs.size(); ++r) {
    if (p_refs[r].adapter && !include_adapter) continue;
    std::vector<double>& theta = *p_refs[r].values;
    const std::vector<double>& g = *g_refs[r].values;
    std::vector<double>& v = state.velocity[r];
    check_shape(theta.size() == g.size() && theta.size() == v.size(),
                std::string("optimizer buffer size mismatch in ") + p_refs[r].name);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      v[i] = momentum * v[i] + g[i] + weight_decay * theta[i];
      theta[i] -= learning_rate * v[i];
    }
  }
}

Episode sample_episode(const Dataset& dataset, int episode_classes, int shots_per_class,
                       Rng& rng) {
  if (episode_classes < 1 || shots_per_class < 1)
    throw ConfigError("episode shape must be positive");
  if (episode_classes > static_cast<int>(dataset.seen_classes.size()))
    throw ConfigError("episode wants " + std::to_string(episode_classes) +
                      " classes but only " + std::to_string(dataset.seen_classes.size()) +
                      " are seen");

  std::unordered_map<int, std::vector<int>> pools;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    if (dataset.samples[i].split == SplitTag::kTrainSeen)
      pools[dataset.samples[i].class_id].push_back(static_cast<int>(i));
  for (int c : dataset.seen_classes) {
    const std::size_t have = pools.count(c) ? pools[c].size() : 0;
    if (have < static_cast<std::size_t>(shots_per_class))
      throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(have) +
                        " training samples, episodes need " +
                        std::to_string(shots_per_class));
  }

  std::vector<int> classes = dataset.seen_classes;
  rng.shuffle(classes);
  classes.resize(episode_classes);

  Episode ep;
  ep.sample_indices.reserve(static_cast<std::size_t>(episode_classes) * shots_per_class);
  ep.labels.reserve(ep.sample_indices.capacity());
  for (int c : classes) {
    std::vector<int>& pool = pools[c];
    rng.shuffle(pool);
    for (int s = 0; s < shots_per_class; ++s) {
      ep.sample_indices.push_back(pool[s]);
      ep.labels.push_back(c);
    }
  }
  return ep;
}

namespace {

void validate_train_config(const Dataset& dataset, const TrainConfig& config) {
  if (config.learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
  if (config.momentum < 0.0 || config.momentum >= 1.0)
    throw ConfigError("momentum must lie in [0,1)");
  if (config.weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
  if (config.epochs < 1 || config.batches_per_epoch < 1)
    throw ConfigError("epoch and batch counts must be positive");
  if (config.pretrain_epochs < 0)
    throw ConfigError("pretraining epoch count must be non-negative");
  if (dataset.num_attributes != config.model.num_attributes)
    throw ConfigError("dataset has " + std::to_string(dataset.num_attributes) +
                      " attributes, model expects " +
                      std::to_string(config.model.num_attributes));
  if (dataset.samples.empty()) throw ConfigError("dataset has no samples");
  const Tensor3& first = dataset.samples.front().features;
  if (first.channels != config.model.input_channels())
    throw ConfigError("dataset features have " + std::to_string(first.channels) +
                      " channels, model expects " +
                      std::to_string(config.model.input_channels()));
}

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  return train(dataset, config, {});
}

TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& per_epoch) {
  validate_train_config(dataset, config);

  TrainResult result;
  result.params = init_parameters(config.model, config.seed);
  OptimizerState opt = init_optimizer_state(result.params);
  Rng episode_rng(config.seed, "episodes");

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const TrainStage stage = epoch < config.pretrain_epochs ? TrainStage::kKernelsOnly
                                                            : TrainStage::kEndToEnd;
    const bool include_adapter =
        stage == TrainStage::kEndToEnd && config.model.has_adapter();
    const auto start = std::chrono::steady_clock::now();

    double total_sum = 0.0, ce_sum = 0.0, mse_sum = 0.0;
    for (int batch = 0; batch < config.batches_per_epoch; ++batch) {
      Episode ep = sample_episode(dataset, config.episode_classes,
                                  config.shots_per_class, episode_rng);
      BatchView view;
      view.images.reserve(ep.sample_indices.size());
      for (int idx : ep.sample_indices)
        view.images.push_back(&dataset.samples[idx].features);
      view.labels = ep.labels;

      BatchLoss loss;
      GradientSet grads = backward(view, result.params, dataset.semantics,
                                   dataset.seen_classes, config.model, config.loss,
                                   stage, &loss);
      if (!std::isfinite(loss.total))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch));
      sgd_step(result.params, grads, opt, config.learning_rate, config.momentum,
               config.weight_decay, include_adapter);
      total_sum += loss.total;
      ce_sum += loss.cross_entropy;
      mse_sum += loss.mse;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.stage = stage;
    rec.mean_total = total_sum / config.batches_per_epoch;
    rec.mean_cross_entropy = ce_sum / config.batches_per_epoch;
    rec.mean_mse = mse_sum / config.batches_per_epoch;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.epochs.push_back(rec);
    if (per_epoch) per_epoch(rec);
  }
  return result;
}

}  // namespace alrn
