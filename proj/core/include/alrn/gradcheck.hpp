#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alrn/model.hpp"
#include "alrn/objective.hpp"

namespace alrn {

// Structure variants selectable by name: "full", "no-arm", "no-scu",
// "no-global", "no-mse", "softmax-revision".
const std::vector<std::string>& variant_names();
void apply_variant(const std::string& name, ModelConfig& model, LossConfig& loss);

// Error metric: |a - n| / max(|a|, |n|, floor). With floor 1e-3 and
// tolerance 1e-4, absolute disagreements below 1e-7 always pass.
double relative_error(double analytic, double numeric, double floor_value);

constexpr double kGradCheckTolerance = 1e-4;
constexpr double kGradCheckFloor = 1e-3;

// A randomized small instance on which analytic gradients are compared
// against the central-difference oracle, buffer by buffer.
struct GradCheckSpec {
  ModelConfig model;
  LossConfig loss;
  TrainStage stage = TrainStage::kEndToEnd;
  int height = 3;
  int width = 3;
  int num_seen = 3;
  int num_unseen = 2;
  int batch = 4;
  std::uint64_t seed = 0;
  double step = 1e-5;
};

// 4 attributes, 6 feature channels from a 5-channel adapter, 3x3 grid,
// 3 seen classes, batch of 4.
GradCheckSpec default_gradcheck_spec();

struct GradCheckGroup {
  std::string name;
  double max_rel_error = 0.0;
  bool skipped = false;  // frozen buffer, not part of the comparison
};

struct GradCheckResult {
  std::vector<GradCheckGroup> groups;
  bool passed = false;
};

GradCheckResult run_gradcheck(const GradCheckSpec& spec);

}  // namespace alrn
