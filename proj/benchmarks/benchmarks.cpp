// Microbenchmarks for the hot paths: the per-sample forward pass, the
// batched analytic backward pass, the attention softmax, and synthetic
// data generation. Shapes follow the stock benchmark geometry.
#include <benchmark/benchmark.h>

#include <cstdlib>
#include <vector>

#include "alrn/dataset.hpp"
#include "alrn/model.hpp"
#include "alrn/objective.hpp"
#include "alrn/ops.hpp"
#include "alrn/rng.hpp"

namespace {

using namespace alrn;

ModelConfig stock_config() {
  ModelConfig config;
  config.num_attributes = 24;
  config.feature_channels = 32;
  return config;
}

Tensor3 random_input(int channels, int height, int width, Rng& rng) {
  Tensor3 x(channels, height, width);
  for (double& v : x.data) v = rng.normal();
  return x;
}

Matrix random_semantics(int num_attributes, int num_classes, Rng& rng) {
  Matrix s(num_attributes, num_classes);
  for (double& v : s.data) v = rng.uniform();
  return s;
}

void bm_model_forward(benchmark::State& state) {
  const ModelConfig config = stock_config();
  Rng rng(0, "bench-forward");
  const ParameterSet params = init_parameters(config, 0);
  const Matrix semantics = random_semantics(config.num_attributes, 16, rng);
  const Tensor3 x = random_input(config.feature_channels, 7, 7, rng);
  for (auto _ : state) {
    auto out = model_forward(x, params, semantics, config);
    benchmark::DoNotOptimize(out.first.fused.data());
  }
}
BENCHMARK(bm_model_forward);

void bm_backward_batch(benchmark::State& state) {
  const ModelConfig config = stock_config();
  Rng rng(0, "bench-backward");
  const ParameterSet params = init_parameters(config, 0);
  const Matrix semantics = random_semantics(config.num_attributes, 16, rng);
  const int batch = static_cast<int>(state.range(0));
  std::vector<Tensor3> images;
  BatchView view;
  for (int b = 0; b < batch; ++b) {
    images.push_back(random_input(config.feature_channels, 7, 7, rng));
    view.labels.push_back(b % 12);
  }
  for (const Tensor3& image : images) view.images.push_back(&image);
  std::vector<int> seen(12);
  for (int c = 0; c < 12; ++c) seen[c] = c;
  LossConfig loss;
  loss.tau = 20.0;
  for (auto _ : state) {
    GradientSet grads = backward(view, params, semantics, seen, config, loss,
                                 TrainStage::kEndToEnd);
    benchmark::DoNotOptimize(grads.attention_weight.data.data());
  }
}
BENCHMARK(bm_backward_batch)->Arg(8)->Arg(24);

void bm_spatial_softmax(benchmark::State& state) {
  Rng rng(0, "bench-softmax");
  const Tensor3 x = random_input(24, 7, 7, rng);
  for (auto _ : state) {
    Tensor3 w = spatial_softmax(x);
    benchmark::DoNotOptimize(w.data.data());
  }
}
BENCHMARK(bm_spatial_softmax);

void bm_generate_synthetic(benchmark::State& state) {
  SynthSpec spec;
  spec.num_classes = 8;
  spec.num_seen = 6;
  spec.samples_per_class = 10;
  for (auto _ : state) {
    SyntheticData data = generate_synthetic(spec);
    benchmark::DoNotOptimize(data.dataset.samples.size());
  }
}
BENCHMARK(bm_generate_synthetic);

}  // namespace

int main(int argc, char** argv) {
  // single-threaded kernels so numbers are comparable across machines
  setenv("ALRN_THREADS", "1", 1);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
