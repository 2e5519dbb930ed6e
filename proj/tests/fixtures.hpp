#pragma once

// Shared instances for the test suites: one fully hand-set forward
// example (values cross-checked against an offline computation) and
// randomized instance builders driven by the library's own rng.

#include <vector>

#include "alrn/model.hpp"
#include "alrn/rng.hpp"
#include "alrn/tensor.hpp"

namespace fixtures {

struct Instance {
  alrn::ModelConfig config;
  alrn::ParameterSet params;
  alrn::Matrix semantics;
  alrn::Tensor3 x;
};

// 2 attributes, 2 channels, 2x2 grid, 2 classes, every unit enabled.
inline Instance hand_instance() {
  Instance inst;
  inst.config.num_attributes = 2;
  inst.config.feature_channels = 2;

  inst.x = alrn::Tensor3(2, 2, 2);
  inst.x.data = {1.0, 0.0, -1.0, 2.0,    // channel 0
                 0.5, 1.0, 0.0, -0.5};   // channel 1

  auto mat = [](double a, double b, double c, double d) {
    alrn::Matrix m(2, 2);
    m.data = {a, b, c, d};
    return m;
  };
  inst.params.attention_weight = mat(1.0, -1.0, 0.5, 0.25);
  inst.params.attention_bias = {0.1, -0.2};
  inst.params.saliency_weight = mat(0.3, 0.7, -0.4, 0.6);
  inst.params.saliency_bias = {0.0, 0.05};
  inst.params.gate_weight = mat(0.2, -0.3, 0.1, 0.4);
  inst.params.gate_bias = {0.05, -0.1};
  inst.params.revision_weight = mat(-0.2, 0.5, 0.3, -0.1);
  inst.params.revision_bias = {0.2, 0.0};

  inst.semantics = mat(0.8, 0.1, 0.3, 0.9);
  return inst;
}

inline alrn::Tensor3 random_input(int channels, int height, int width, alrn::Rng& rng) {
  alrn::Tensor3 x(channels, height, width);
  for (double& v : x.data) v = rng.normal();
  return x;
}

// Synthetic-style semantics: half the entries inactive, the rest in
// (0,1); every column keeps at least one active attribute.
inline alrn::Matrix random_semantics(int num_attributes, int num_classes,
                                     alrn::Rng& rng) {
  alrn::Matrix s(num_attributes, num_classes);
  for (int i = 0; i < num_classes; ++i) {
    bool any = false;
    while (!any) {
      for (int n = 0; n < num_attributes; ++n) {
        const double v = rng.uniform() < 0.5 ? rng.uniform() : 0.0;
        s.at(n, i) = v;
        any = any || v > 0.0;
      }
    }
  }
  return s;
}

inline Instance random_instance(const alrn::ModelConfig& config, int height, int width,
                                int num_classes, alrn::Rng& rng) {
  Instance inst;
  inst.config = config;
  inst.params = alrn::init_parameters(config, rng.next());
  inst.semantics = random_semantics(config.num_attributes, num_classes, rng);
  inst.x = random_input(config.input_channels(), height, width, rng);
  return inst;
}

}  // namespace fixtures
