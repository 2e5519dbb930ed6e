#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "alrn/dataset.hpp"
#include "alrn/model.hpp"

namespace alrn {

// Disjoint seen/unseen class id sets.
struct SplitSpec {
  std::vector<int> seen;
  std::vector<int> unseen;
};

// Calibration settings for prediction. tau is the same score scale
// used by the training objective; mu is subtracted from seen-class
// scores. czsl_use_revised selects image-conditioned semantics for the
// unseen-only protocol (the raw class semantics when false).
struct GzslConfig {
  double mu = 0.0;
  double tau = 35.0;
  bool czsl_use_revised = true;
};

struct EvalReport {
  std::map<int, double> per_class;  // percent, over the mixed protocol
  double seen_acc = 0.0;            // S
  double unseen_acc = 0.0;          // U
  double harmonic = 0.0;            // H
  double czsl_top1 = 0.0;           // T1
  int seen_prediction_count = 0;    // mixed-protocol samples routed to a seen class
};

// Unseen-only protocol: argmax over unseen classes of the cosine
// between the predicted attribute vector and that class's column of
// class_semantics. Ties break toward the smallest class id.
int czsl_predict(const Vector& predicted, const Matrix& class_semantics,
                 const SplitSpec& split);

// Mixed protocol: argmax over all classes of tau * cosine minus mu for
// seen classes. Ties break toward the smallest class id.
int gzsl_predict(const Vector& predicted, const Matrix& class_semantics,
                 const SplitSpec& split, const GzslConfig& config);

// Mean over classes of the within-class fraction correct, in percent.
// Every class must have at least one sample.
double per_class_top1(const std::vector<std::pair<int, int>>& true_and_predicted,
                      const std::vector<int>& classes);

// 2SU/(S+U); 0 when both are 0.
double harmonic_mean(double seen_acc, double unseen_acc);

// Runs the model over every test sample: T1 from the unseen-only
// protocol on test_unseen, S/U/H from the calibrated mixed protocol on
// test_seen + test_unseen. Deterministic; parallel over samples.
EvalReport evaluate(const Dataset& dataset, const ParameterSet& params,
                    const ModelConfig& model_config, const GzslConfig& gzsl_config);

// Single JSON object with keys T1, S, U, H, per_class.
std::string to_json_string(const EvalReport& report);

}  // namespace alrn
