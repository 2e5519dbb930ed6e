#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "alrn/model.hpp"
#include "alrn/rng.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace alrn;

namespace {

void check_close(const Vector& got, const std::vector<double>& want, double eps) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(eps).scale(1.0));
}

std::vector<ModelConfig> variant_configs(int num_attributes, int channels, int adapter) {
  ModelConfig base;
  base.num_attributes = num_attributes;
  base.feature_channels = channels;
  base.adapter_channels = adapter;
  std::vector<ModelConfig> out;
  out.push_back(base);  // full
  ModelConfig v = base;
  v.use_arm = false;
  out.push_back(v);
  v = base;
  v.use_scu = false;
  out.push_back(v);
  v = base;
  v.use_global = false;
  out.push_back(v);
  v = base;
  v.revision_activation = RevisionActivation::kSoftmax;
  out.push_back(v);
  return out;
}

}  // namespace

TEST_CASE("reference forward reproduces offline-computed values") {
  auto inst = fixtures::hand_instance();
  oracle::Forward ref = oracle::forward(inst.x, inst.params, inst.semantics, inst.config);

  check_close(Vector(ref.attention[0].begin(), ref.attention[0].end()),
              {0.11318213774707483, 0.02525434852144645, 0.02525434852144645,
               0.8363091652100322},
              1e-13);
  check_close(Vector(ref.attention[1].begin(), ref.attention[1].end()),
              {0.30340108095592555, 0.20852431011459943, 0.09849990953153163,
               0.3895746993979435},
              1e-13);
  check_close(ref.local, {0.29274742024668526, -0.24435772755195811}, 1e-13);
  check_close(ref.global_feat, {0.32499999999999996, 0.0}, 1e-13);
  check_close(ref.gate, {0.5187412158785352, 0.5124973964842103}, 1e-13);
  check_close(ref.fused, {0.30826925756354606, -0.12523269918117652}, 1e-13);
  check_close(ref.revision, {0.5560138905446199, 0.5312093733737563}, 1e-13);
  CHECK(ref.psi[0][0] == doctest::Approx(0.44481111243569593).epsilon(1e-13));
  CHECK(ref.psi[0][1] == doctest::Approx(0.05560138905446199).epsilon(1e-13));
  CHECK(ref.psi[1][0] == doctest::Approx(0.15936281201212688).epsilon(1e-13));
  CHECK(ref.psi[1][1] == doctest::Approx(0.4780884360363807).epsilon(1e-13));
}

TEST_CASE("model_forward matches the reference on the hand-set instance") {
  auto inst = fixtures::hand_instance();
  auto [trace, revised] = model_forward(inst.x, inst.params, inst.semantics, inst.config);
  oracle::Forward ref = oracle::forward(inst.x, inst.params, inst.semantics, inst.config);

  const double eps = 1e-12;
  for (int n = 0; n < 2; ++n)
    for (int p = 0; p < 4; ++p) {
      CHECK(trace.attention.channel(n)[p] ==
            doctest::Approx(ref.attention[n][p]).epsilon(eps).scale(1.0));
      CHECK(trace.saliency.channel(n)[p] ==
            doctest::Approx(ref.saliency[n][p]).epsilon(eps).scale(1.0));
    }
  check_close(trace.local, ref.local, eps);
  check_close(trace.global, ref.global_feat, eps);
  check_close(trace.gate, ref.gate, eps);
  check_close(trace.fused, ref.fused, eps);
  check_close(trace.revision, ref.revision, eps);
  for (int n = 0; n < 2; ++n)
    for (int i = 0; i < 2; ++i)
      CHECK(revised.psi.at(n, i) ==
            doctest::Approx(ref.psi[n][i]).epsilon(eps).scale(1.0));
}

TEST_CASE("model_forward agrees with the reference on randomized variants") {
  Rng rng(101, "model-agreement");
  for (int adapter : {0, 5}) {
    for (const ModelConfig& base : variant_configs(3, 4, adapter)) {
      for (int trial = 0; trial < 40; ++trial) {
        auto inst = fixtures::random_instance(base, 3, 3, 4, rng);
        auto [trace, revised] =
            model_forward(inst.x, inst.params, inst.semantics, inst.config);
        oracle::Forward ref =
            oracle::forward(inst.x, inst.params, inst.semantics, inst.config);
        for (std::size_t n = 0; n < trace.fused.size(); ++n) {
          CHECK(trace.fused[n] == doctest::Approx(ref.fused[n]).epsilon(1e-10).scale(1.0));
          CHECK(trace.revision[n] ==
                doctest::Approx(ref.revision[n]).epsilon(1e-10).scale(1.0));
        }
        for (int n = 0; n < inst.config.num_attributes; ++n)
          for (int i = 0; i < 4; ++i)
            CHECK(revised.psi.at(n, i) ==
                  doctest::Approx(ref.psi[n][i]).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("attention channels always sum to one") {
  Rng rng(17, "attention-norm");
  ModelConfig cfg;
  cfg.num_attributes = 5;
  cfg.feature_channels = 6;
  for (int trial = 0; trial < 1000; ++trial) {
    auto inst = fixtures::random_instance(cfg, 4, 3, 3, rng);
    auto [trace, revised] = model_forward(inst.x, inst.params, inst.semantics, cfg);
    for (int n = 0; n < cfg.num_attributes; ++n) {
      double sum = 0.0;
      for (int p = 0; p < trace.attention.spatial(); ++p) {
        CHECK(trace.attention.channel(n)[p] >= 0.0);
        sum += trace.attention.channel(n)[p];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("gate and sigmoid revision lie strictly inside (0,1)") {
  Rng rng(19, "unit-range");
  ModelConfig cfg;
  cfg.num_attributes = 4;
  cfg.feature_channels = 5;
  for (int trial = 0; trial < 1000; ++trial) {
    auto inst = fixtures::random_instance(cfg, 3, 3, 3, rng);
    auto [trace, revised] = model_forward(inst.x, inst.params, inst.semantics, cfg);
    for (int n = 0; n < cfg.num_attributes; ++n) {
      CHECK(trace.gate[n] > 0.0);
      CHECK(trace.gate[n] < 1.0);
      CHECK(trace.revision[n] > 0.0);
      CHECK(trace.revision[n] < 1.0);
    }
  }
}

TEST_CASE("softmax revision forms a distribution over attributes") {
  Rng rng(23, "softmax-rev");
  ModelConfig cfg;
  cfg.num_attributes = 6;
  cfg.feature_channels = 4;
  cfg.revision_activation = RevisionActivation::kSoftmax;
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = fixtures::random_instance(cfg, 3, 3, 3, rng);
    auto [trace, revised] = model_forward(inst.x, inst.params, inst.semantics, cfg);
    double sum = 0.0;
    for (double r : trace.revision) {
      CHECK(r > 0.0);
      sum += r;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gated fusion stays between the local and global features") {
  Rng rng(29, "betweenness");
  for (bool scu : {true, false}) {
    ModelConfig cfg;
    cfg.num_attributes = 4;
    cfg.feature_channels = 5;
    cfg.use_scu = scu;
    for (int trial = 0; trial < 1000; ++trial) {
      auto inst = fixtures::random_instance(cfg, 3, 4, 3, rng);
      auto [trace, revised] = model_forward(inst.x, inst.params, inst.semantics, cfg);
      for (int n = 0; n < cfg.num_attributes; ++n) {
        const double lo = std::min(trace.local[n], trace.global[n]);
        const double hi = std::max(trace.local[n], trace.global[n]);
        CHECK(trace.fused[n] >= lo - 1e-12);
        CHECK(trace.fused[n] <= hi + 1e-12);
      }
    }
  }
}

TEST_CASE("disabling revision leaves the class semantics untouched") {
  Rng rng(31, "no-arm");
  ModelConfig cfg;
  cfg.num_attributes = 4;
  cfg.feature_channels = 5;
  cfg.use_arm = false;
  auto inst = fixtures::random_instance(cfg, 3, 3, 4, rng);
  auto [trace, revised] = model_forward(inst.x, inst.params, inst.semantics, cfg);
  for (double r : trace.revision) CHECK(r == 1.0);
  for (int n = 0; n < cfg.num_attributes; ++n)
    for (int i = 0; i < 4; ++i) CHECK(revised.psi.at(n, i) == inst.semantics.at(n, i));
}

TEST_CASE("disabling the global path returns the local feature unchanged") {
  Rng rng(37, "no-global");
  ModelConfig cfg;
  cfg.num_attributes = 3;
  cfg.feature_channels = 4;
  cfg.use_global = false;
  auto inst = fixtures::random_instance(cfg, 3, 3, 3, rng);
  auto [trace, revised] = model_forward(inst.x, inst.params, inst.semantics, cfg);
  CHECK(trace.fused == trace.local);
  CHECK(trace.global.empty());
  CHECK(trace.gate.empty());
}

TEST_CASE("plain averaging replaces the gate when the gate unit is off") {
  Rng rng(41, "no-scu");
  ModelConfig cfg;
  cfg.num_attributes = 3;
  cfg.feature_channels = 4;
  cfg.use_scu = false;
  auto inst = fixtures::random_instance(cfg, 3, 3, 3, rng);
  auto [trace, revised] = model_forward(inst.x, inst.params, inst.semantics, cfg);
  CHECK(trace.gate.empty());
  for (int n = 0; n < cfg.num_attributes; ++n)
    CHECK(trace.fused[n] ==
          doctest::Approx(0.5 * (trace.local[n] + trace.global[n])).epsilon(1e-15));
}

TEST_CASE("parameter initialization is seed deterministic and bounded") {
  ModelConfig cfg;
  cfg.num_attributes = 6;
  cfg.feature_channels = 10;
  cfg.adapter_channels = 8;

  ParameterSet a = init_parameters(cfg, 99);
  ParameterSet b = init_parameters(cfg, 99);
  ParameterSet c = init_parameters(cfg, 100);

  auto refs_a = parameter_buffers(a);
  auto refs_b = parameter_buffers(b);
  auto refs_c = parameter_buffers(c);
  REQUIRE(refs_a.size() == 10);  // 4 kernels + adapter, weight and bias each
  bool any_diff = false;
  for (std::size_t r = 0; r < refs_a.size(); ++r) {
    CHECK(*refs_a[r].values == *refs_b[r].values);
    any_diff = any_diff || *refs_a[r].values != *refs_c[r].values;
  }
  CHECK(any_diff);

  const double kernel_bound = std::sqrt(6.0 / (6 + 10));
  for (double v : a.attention_weight.data) {
    CHECK(v >= -kernel_bound);
    CHECK(v <= kernel_bound);
  }
  const double adapter_bound = std::sqrt(6.0 / (10 + 8));
  for (double v : a.adapter_weight.data) {
    CHECK(v >= -adapter_bound);
    CHECK(v <= adapter_bound);
  }
  for (double v : a.attention_bias) CHECK(v == 0.0);
  for (double v : a.adapter_bias) CHECK(v == 0.0);
}

TEST_CASE("parameter buffer listing has a fixed order and adapter flags") {
  ModelConfig cfg;
  cfg.num_attributes = 2;
  cfg.feature_channels = 3;
  cfg.adapter_channels = 4;
  ParameterSet p = init_parameters(cfg, 0);
  auto refs = parameter_buffers(p);
  const std::vector<std::string> want = {
      "attention_weight", "attention_bias", "saliency_weight", "saliency_bias",
      "gate_weight",      "gate_bias",      "revision_weight", "revision_bias",
      "adapter_weight",   "adapter_bias"};
  REQUIRE(refs.size() == want.size());
  for (std::size_t r = 0; r < refs.size(); ++r) {
    CHECK(refs[r].name == want[r]);
    CHECK(refs[r].adapter == (r >= 8));
  }

  ModelConfig plain = cfg;
  plain.adapter_channels = 0;
  ParameterSet q = init_parameters(plain, 0);
  CHECK(parameter_buffers(q).size() == 8);

  GradientSet z = zeros_like(p);
  for (const auto& ref : parameter_buffers(z))
    for (double v : *ref.values) CHECK(v == 0.0);
}

TEST_CASE("revise_semantics scales rows and validates shapes") {
  Matrix s(2, 3);
  s.data = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  RevisedSemantics out = revise_semantics({0.5, 2.0}, s);
  const std::vector<double> want = {0.5, 1.0, 1.5, 8.0, 10.0, 12.0};
  CHECK(out.psi.data == want);
  CHECK_THROWS_AS(revise_semantics({0.5}, s), ShapeError);
}

TEST_CASE("model_forward validates input and kernel shapes") {
  auto inst = fixtures::hand_instance();
  Tensor3 bad(3, 2, 2);
  CHECK_THROWS_AS(model_forward(bad, inst.params, inst.semantics, inst.config),
                  ShapeError);
  Matrix bad_semantics(3, 2);
  CHECK_THROWS_AS(model_forward(inst.x, inst.params, bad_semantics, inst.config),
                  ShapeError);
  ParameterSet broken = inst.params;
  broken.saliency_bias = {0.0};
  CHECK_THROWS_AS(model_forward(inst.x, broken, inst.semantics, inst.config),
                  ShapeError);
}
