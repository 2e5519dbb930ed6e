#include "alrn/evaluator.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "alrn/ops.hpp"
#include "alrn/parallel.hpp"

namespace alrn {
namespace {

void check_gzsl_config(const GzslConfig& config) {
  if (config.tau <= 0.0) throw ConfigError("temperature must be positive");
}

Vector column_of(const Matrix& m, int col) {
  Vector v(m.rows);
  for (int n = 0; n < m.rows; ++n) v[n] = m.at(n, col);
  return v;
}

void check_class_ids(const std::vector<int>& ids, const Matrix& semantics,
                     const char* which) {
  for (int id : ids)
    check_shape(id >= 0 && id < semantics.cols,
                std::string(which) + " class id " + std::to_string(id) +
                    " outside semantic matrix with " + std::to_string(semantics.cols) +
                    " columns");
}

}  // namespace

int czsl_predict(const Vector& predicted, const Matrix& class_semantics,
                 const SplitSpec& split) {
  if (split.unseen.empty()) throw ConfigError("unseen class set is empty");
  check_class_ids(split.unseen, class_semantics, "unseen");
  std::vector<int> order = split.unseen;
  std::sort(order.begin(), order.end());
  int best_id = -1;
  double best_score = 0.0;
  for (int id : order) {
    const double score = cosine_similarity(predicted, column_of(class_semantics, id));
    if (best_id < 0 || score > best_score) {
      best_id = id;
      best_score = score;
    }
  }
  return best_id;
}

int gzsl_predict(const Vector& predicted, const Matrix& class_semantics,
                 const SplitSpec& split, const GzslConfig& config) {
  check_gzsl_config(config);
  if (split.seen.empty() && split.unseen.empty())
    throw ConfigError("no classes to predict over");
  check_class_ids(split.seen, class_semantics, "seen");
  check_class_ids(split.unseen, class_semantics, "unseen");

  std::vector<std::pair<int, bool>> order;  // (id, is_seen), ascending id
  order.reserve(split.seen.size() + split.unseen.size());
  for (int id : split.seen) order.emplace_back(id, true);
  for (int id : split.unseen) order.emplace_back(id, false);
  std::sort(order.begin(), order.end());

  int best_id = -1;
  double best_score = 0.0;
  for (const auto& [id, is_seen] : order) {
    double score =
        config.tau * cosine_similarity(predicted, column_of(class_semantics, id));
    if (is_seen) score -= config.mu;
    if (best_id < 0 || score > best_score) {
      best_id = id;
      best_score = score;
    }
  }
  return best_id;
}

double per_class_top1(const std::vector<std::pair<int, int>>& true_and_predicted,
                      const std::vector<int>& classes) {
  if (classes.empty()) throw ConfigError("per-class accuracy over no classes");
  std::map<int, std::pair<int, int>> tally;  // class -> (correct, total)
  for (int c : classes) tally.emplace(c, std::pair<int, int>{0, 0});
  for (const auto& [truth, predicted] : true_and_predicted) {
    auto it = tally.find(truth);
    if (it == tally.end())
      throw ConfigError("sample labeled " + std::to_string(truth) +
                        " is outside the class set");
    it->second.second += 1;
    it->second.first += predicted == truth;
  }
  double sum = 0.0;
  for (const auto& [c, counts] : tally) {
    if (counts.second == 0)
      throw ConfigError("class " + std::to_string(c) + " has no samples");
    sum += static_cast<double>(counts.first) / counts.second;
  }
  return 100.0 * sum / static_cast<double>(classes.size());
}

double harmonic_mean(double seen_acc, double unseen_acc) {
  if (seen_acc < 0.0 || unseen_acc < 0.0)
    throw ConfigError("accuracies must be non-negative");
  const double sum = seen_acc + unseen_acc;
  if (sum == 0.0) return 0.0;
  return 2.0 * seen_acc * unseen_acc / sum;
}

EvalReport evaluate(const Dataset& dataset, const ParameterSet& params,
                    const ModelConfig& model_config, const GzslConfig& gzsl_config) {
  check_gzsl_config(gzsl_config);
  {
    std::set<int> seen(dataset.seen_classes.begin(), dataset.seen_classes.end());
    for (int id : dataset.unseen_classes)
      if (seen.count(id))
        throw ConfigError("class " + std::to_string(id) + " is both seen and unseen");
  }
  SplitSpec split{dataset.seen_classes, dataset.unseen_classes};

  std::vector<int> test_indices;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    if (dataset.samples[i].split != SplitTag::kTrainSeen)
      test_indices.push_back(static_cast<int>(i));
  if (test_indices.empty()) throw ConfigError("dataset has no test samples");

  struct SamplePrediction {
    int truth = 0;
    bool unseen_sample = false;
    int gzsl = -1;
    int czsl = -1;
  };
  std::vector<SamplePrediction> preds(test_indices.size());

  parallel_for(test_indices.size(), [&](std::size_t k) {
    const Sample& sample = dataset.samples[test_indices[k]];
    auto [trace, revised] =
        model_forward(sample.features, params, dataset.semantics, model_config);
    SamplePrediction& p = preds[k];
    p.truth = sample.class_id;
    p.unseen_sample = sample.split == SplitTag::kTestUnseen;
    p.gzsl = gzsl_predict(trace.fused, revised.psi, split, gzsl_config);
    if (p.unseen_sample)
      p.czsl = czsl_predict(
          trace.fused, gzsl_config.czsl_use_revised ? revised.psi : dataset.semantics,
          split);
  });

  std::vector<std::pair<int, int>> gzsl_seen, gzsl_unseen, czsl_pairs;
  std::set<int> seen_with_samples, unseen_with_samples;
  int routed_to_seen = 0;
  std::set<int> seen_set(dataset.seen_classes.begin(), dataset.seen_classes.end());
  for (const SamplePrediction& p : preds) {
    if (seen_set.count(p.gzsl)) ++routed_to_seen;
    if (p.unseen_sample) {
      gzsl_unseen.emplace_back(p.truth, p.gzsl);
      czsl_pairs.emplace_back(p.truth, p.czsl);
      unseen_with_samples.insert(p.truth);
    } else {
      gzsl_seen.emplace_back(p.truth, p.gzsl);
      seen_with_samples.insert(p.truth);
    }
  }
  if (gzsl_seen.empty()) throw ConfigError("no test samples from seen classes");
  if (gzsl_unseen.empty()) throw ConfigError("no test samples from unseen classes");

  std::vector<int> seen_classes(seen_with_samples.begin(), seen_with_samples.end());
  std::vector<int> unseen_classes(unseen_with_samples.begin(), unseen_with_samples.end());

  EvalReport report;
  report.seen_acc = per_class_top1(gzsl_seen, seen_classes);
  report.unseen_acc = per_class_top1(gzsl_unseen, unseen_classes);
  report.harmonic = harmonic_mean(report.seen_acc, report.unseen_acc);
  report.czsl_top1 = per_class_top1(czsl_pairs, unseen_classes);
  report.seen_prediction_count = routed_to_seen;

  // Per-class accuracies under the mixed protocol.
  std::map<int, std::pair<int, int>> tally;
  for (const SamplePrediction& p : preds) {
    auto& counts = tally[p.truth];
    counts.second += 1;
    counts.first += p.gzsl == p.truth;
  }
  for (const auto& [c, counts] : tally)
    report.per_class[c] = 100.0 * counts.first / counts.second;
  return report;
}

std::string to_json_string(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["T1"] = report.czsl_top1;
  j["S"] = report.seen_acc;
  j["U"] = report.unseen_acc;
  j["H"] = report.harmonic;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (const auto& [c, acc] : report.per_class) per_class[std::to_string(c)] = acc;
  j["per_class"] = std::move(per_class);
  return j.dump(2);
}

}  // namespace alrn
