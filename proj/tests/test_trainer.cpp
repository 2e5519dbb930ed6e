#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "alrn/dataset.hpp"
#include "alrn/model.hpp"
#include "alrn/rng.hpp"
#include "alrn/trainer.hpp"
#include "fixtures.hpp"

using namespace alrn;

namespace {

// Hand-built dataset: seen classes get train_per_class training samples
// and one test sample each, unseen classes one test sample each.
Dataset tiny_dataset(int num_seen, int num_unseen, int train_per_class, int channels,
                     Rng& rng) {
  Dataset ds;
  ds.num_attributes = 3;
  ds.num_classes = num_seen + num_unseen;
  ds.semantics = fixtures::random_semantics(ds.num_attributes, ds.num_classes, rng);
  for (int c = 0; c < num_seen; ++c) ds.seen_classes.push_back(c);
  for (int c = num_seen; c < ds.num_classes; ++c) ds.unseen_classes.push_back(c);
  for (int c = 0; c < num_seen; ++c) {
    for (int i = 0; i < train_per_class; ++i)
      ds.samples.push_back({fixtures::random_input(channels, 2, 2, rng), c,
                            SplitTag::kTrainSeen});
    ds.samples.push_back({fixtures::random_input(channels, 2, 2, rng), c,
                          SplitTag::kTestSeen});
  }
  for (int c : ds.unseen_classes)
    ds.samples.push_back({fixtures::random_input(channels, 2, 2, rng), c,
                          SplitTag::kTestUnseen});
  return ds;
}

bool same_params(const ParameterSet& a, const ParameterSet& b) {
  auto ra = parameter_buffers(a);
  auto rb = parameter_buffers(b);
  if (ra.size() != rb.size()) return false;
  for (std::size_t i = 0; i < ra.size(); ++i)
    if (*ra[i].values != *rb[i].values) return false;
  return true;
}

SynthSpec small_spec() {
  SynthSpec spec;
  spec.num_classes = 5;
  spec.num_seen = 3;
  spec.samples_per_class = 6;
  spec.num_attributes = 6;
  spec.channels = 8;
  spec.height = 4;
  spec.width = 4;
  spec.patch_size = 2;
  spec.seed = 11;
  return spec;
}

TrainConfig small_train_config() {
  TrainConfig config;
  config.model.num_attributes = 6;
  config.model.feature_channels = 8;
  config.episode_classes = 2;
  config.shots_per_class = 2;
  config.batches_per_epoch = 3;
  config.epochs = 2;
  config.pretrain_epochs = 1;
  config.seed = 7;
  return config;
}

}  // namespace

TEST_CASE("momentum update follows the classical recurrence") {
  ModelConfig cfg;
  cfg.num_attributes = 1;
  cfg.feature_channels = 1;
  ParameterSet params = init_parameters(cfg, 0);
  params.attention_weight.data = {1.0};
  params.saliency_weight.data = {2.0};
  params.gate_weight.data = {0.0};

  GradientSet grads = zeros_like(params);
  grads.attention_weight.data = {0.5};

  OptimizerState state = init_optimizer_state(params);
  for (const auto& v : state.velocity)
    for (double x : v) CHECK(x == 0.0);
  state.velocity[0] = {0.2};  // attention weight buffer

  sgd_step(params, grads, state, 1e-3, 0.9, 1e-5, true);

  // v' = 0.9*0.2 + 0.5 + 1e-5*1.0, theta' = 1.0 - 1e-3*v'
  CHECK(state.velocity[0][0] == doctest::Approx(0.68001).epsilon(1e-15));
  CHECK(params.attention_weight.data[0] ==
        doctest::Approx(0.99931999).epsilon(1e-15));

  // decay acts even with a zero gradient
  CHECK(state.velocity[2][0] == doctest::Approx(2e-5).epsilon(1e-15));
  CHECK(params.saliency_weight.data[0] ==
        doctest::Approx(1.99999998).epsilon(1e-15));

  // zero parameter, zero gradient: nothing moves
  CHECK(params.gate_weight.data[0] == 0.0);
  CHECK(state.velocity[4][0] == 0.0);
}

TEST_CASE("excluded adapter buffers are bitwise untouched by the optimizer") {
  ModelConfig cfg;
  cfg.num_attributes = 2;
  cfg.feature_channels = 3;
  cfg.adapter_channels = 4;
  ParameterSet params = init_parameters(cfg, 5);
  const Vector adapter_w = params.adapter_weight.data;
  const Vector adapter_b = params.adapter_bias;

  GradientSet grads = zeros_like(params);
  for (auto& ref : parameter_buffers(grads))
    for (double& v : *ref.values) v = 0.25;

  OptimizerState state = init_optimizer_state(params);
  sgd_step(params, grads, state, 0.1, 0.9, 1e-2, false);

  CHECK(params.adapter_weight.data == adapter_w);
  CHECK(params.adapter_bias == adapter_b);
  for (double v : state.velocity[8]) CHECK(v == 0.0);
  for (double v : state.velocity[9]) CHECK(v == 0.0);
  // non-adapter buffers did move
  CHECK(params.attention_weight.data != adapter_w);
  for (double v : state.velocity[0]) CHECK(v != 0.0);

  sgd_step(params, grads, state, 0.1, 0.9, 1e-2, true);
  CHECK(params.adapter_weight.data != adapter_w);
}

TEST_CASE("episodes draw distinct classes with the requested shot count") {
  Rng data_rng(3, "episode-data");
  Dataset ds = tiny_dataset(4, 2, 3, 5, data_rng);

  Rng rng(21, "episodes");
  Episode ep = sample_episode(ds, 3, 2, rng);
  REQUIRE(ep.sample_indices.size() == 6);
  REQUIRE(ep.labels.size() == 6);

  std::set<int> classes(ep.labels.begin(), ep.labels.end());
  CHECK(classes.size() == 3);
  std::set<int> indices(ep.sample_indices.begin(), ep.sample_indices.end());
  CHECK(indices.size() == 6);  // without replacement
  for (std::size_t i = 0; i < ep.sample_indices.size(); ++i) {
    const Sample& s = ds.samples[ep.sample_indices[i]];
    CHECK(s.class_id == ep.labels[i]);
    CHECK(s.split == SplitTag::kTrainSeen);
  }
  for (int c : classes) {
    int count = 0;
    for (int label : ep.labels) count += label == c;
    CHECK(count == 2);
  }

  Rng rng_a(21, "episodes");
  Rng rng_b(21, "episodes");
  Episode first = sample_episode(ds, 3, 2, rng_a);
  Episode second = sample_episode(ds, 3, 2, rng_b);
  CHECK(first.sample_indices == second.sample_indices);
  CHECK(first.labels == second.labels);
}

TEST_CASE("episode sampling validates the class and shot budget") {
  Rng data_rng(4, "episode-bad");
  Dataset ds = tiny_dataset(3, 1, 2, 4, data_rng);
  Rng rng(0, "episodes");
  CHECK_THROWS_AS(sample_episode(ds, 4, 1, rng), ConfigError);
  CHECK_THROWS_AS(sample_episode(ds, 2, 3, rng), ConfigError);
  CHECK_THROWS_AS(sample_episode(ds, 0, 1, rng), ConfigError);
  CHECK_THROWS_AS(sample_episode(ds, 2, 0, rng), ConfigError);
}

TEST_CASE("training is deterministic for a fixed seed") {
  SyntheticData data = generate_synthetic(small_spec());
  TrainConfig config = small_train_config();

  TrainResult a = train(data.dataset, config);
  TrainResult b = train(data.dataset, config);
  CHECK(same_params(a.params, b.params));
  REQUIRE(a.log.epochs.size() == 2);
  REQUIRE(b.log.epochs.size() == 2);
  for (std::size_t e = 0; e < a.log.epochs.size(); ++e) {
    CHECK(a.log.epochs[e].mean_total == b.log.epochs[e].mean_total);
    CHECK(a.log.epochs[e].mean_cross_entropy == b.log.epochs[e].mean_cross_entropy);
    CHECK(a.log.epochs[e].mean_mse == b.log.epochs[e].mean_mse);
  }

  TrainConfig other = config;
  other.seed = 8;
  TrainResult c = train(data.dataset, other);
  CHECK_FALSE(same_params(a.params, c.params));
}

TEST_CASE("the schedule switches from kernel pretraining to end to end") {
  SyntheticData data = generate_synthetic(small_spec());
  TrainConfig config = small_train_config();
  config.epochs = 3;
  config.pretrain_epochs = 2;

  std::vector<EpochRecord> seen_records;
  TrainResult result = train(data.dataset, config,
                             [&](const EpochRecord& r) { seen_records.push_back(r); });

  REQUIRE(result.log.epochs.size() == 3);
  REQUIRE(seen_records.size() == 3);
  for (int e = 0; e < 3; ++e) {
    CHECK(result.log.epochs[e].epoch == e);
    CHECK(result.log.epochs[e].stage ==
          (e < 2 ? TrainStage::kKernelsOnly : TrainStage::kEndToEnd));
    CHECK(seen_records[e].mean_total == result.log.epochs[e].mean_total);
    CHECK(result.log.epochs[e].wall_seconds >= 0.0);
    CHECK(std::isfinite(result.log.epochs[e].mean_total));
  }
}

TEST_CASE("the adapter only moves once the end-to-end stage begins") {
  SynthSpec spec = small_spec();
  SyntheticData data = generate_synthetic(spec);

  TrainConfig config = small_train_config();
  config.model.feature_channels = 6;
  config.model.adapter_channels = 8;  // matches the data channels
  config.epochs = 1;
  config.pretrain_epochs = 1;

  TrainResult pretrained = train(data.dataset, config);
  ParameterSet fresh = init_parameters(config.model, config.seed);
  CHECK(pretrained.params.adapter_weight.data == fresh.adapter_weight.data);
  CHECK(pretrained.params.adapter_bias == fresh.adapter_bias);
  CHECK(pretrained.params.attention_weight.data != fresh.attention_weight.data);

  config.epochs = 2;
  TrainResult tuned = train(data.dataset, config);
  CHECK(tuned.params.adapter_weight.data != fresh.adapter_weight.data);
}

TEST_CASE("training rejects inconsistent configuration") {
  SyntheticData data = generate_synthetic(small_spec());
  const TrainConfig good = small_train_config();

  TrainConfig bad = good;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train(data.dataset, bad), ConfigError);
  bad = good;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(train(data.dataset, bad), ConfigError);
  bad = good;
  bad.weight_decay = -1e-5;
  CHECK_THROWS_AS(train(data.dataset, bad), ConfigError);
  bad = good;
  bad.epochs = 0;
  CHECK_THROWS_AS(train(data.dataset, bad), ConfigError);
  bad = good;
  bad.pretrain_epochs = -1;
  CHECK_THROWS_AS(train(data.dataset, bad), ConfigError);
  bad = good;
  bad.model.num_attributes = 5;  // dataset carries 6
  CHECK_THROWS_AS(train(data.dataset, bad), ConfigError);
  bad = good;
  bad.model.feature_channels = 7;  // dataset features carry 8 channels
  CHECK_THROWS_AS(train(data.dataset, bad), ConfigError);
}
