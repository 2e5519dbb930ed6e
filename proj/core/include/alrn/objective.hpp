#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "alrn/model.hpp"
#include "alrn/tensor.hpp"

namespace alrn {

// Scores are tau-scaled cosine similarities; the squared-error term is
// weighted by mse_weight (0 disables it).
struct LossConfig {
  double tau = 35.0;
  double mse_weight = 1.0;
};

// kKernelsOnly freezes the adapter: its gradients stay zero and the
// optimizer skips its buffers entirely.
enum class TrainStage { kKernelsOnly, kEndToEnd };

struct BatchLoss {
  double total = 0.0;          // cross_entropy + mse_weight * mse
  double cross_entropy = 0.0;  // batch mean
  double mse = 0.0;            // batch mean, unweighted
  Matrix logits;               // [batch x num_seen], tau * cosine
};

// One batch of borrowed feature maps with their global class ids.
struct BatchView {
  std::vector<const Tensor3*> images;
  std::vector<int> labels;
};

double cross_entropy_from_logits(const Vector& logits, int target);

// Classification term: softmax over tau-scaled cosines between the
// fused attribute vector and each seen class's revised semantics.
// Returns the batch-mean loss and the [batch x num_seen] score matrix.
std::pair<double, Matrix> ce_loss(const std::vector<ForwardTrace>& traces,
                                  const std::vector<RevisedSemantics>& revised,
                                  const std::vector<int>& labels,
                                  const std::vector<int>& seen_classes,
                                  const LossConfig& config);

// Batch mean of the squared distance between the fused attribute
// vector and the revised semantics of the true class.
double mse_loss(const std::vector<ForwardTrace>& traces,
                const std::vector<RevisedSemantics>& revised,
                const std::vector<int>& labels);

BatchLoss total_loss(const std::vector<ForwardTrace>& traces,
                     const std::vector<RevisedSemantics>& revised,
                     const std::vector<int>& labels,
                     const std::vector<int>& seen_classes,
                     const LossConfig& config);

// Batch loss as a pure function of the parameters (forward included).
double batch_loss_value(const BatchView& batch, const ParameterSet& params,
                        const Matrix& semantics, const std::vector<int>& seen_classes,
                        const ModelConfig& model_config, const LossConfig& loss_config);

// Analytic gradients of the batch-mean loss with respect to every
// trainable buffer. Samples are processed independently (possibly in
// parallel) and reduced in index order, so results do not depend on
// the worker count. When loss_out is given it receives the losses and
// score matrix of the same forward pass.
GradientSet backward(const BatchView& batch, const ParameterSet& params,
                     const Matrix& semantics, const std::vector<int>& seen_classes,
                     const ModelConfig& model_config, const LossConfig& loss_config,
                     TrainStage stage, BatchLoss* loss_out = nullptr);

// (f(x+h) - f(x-h)) / 2h
double central_difference(const std::function<double(double)>& f, double x, double h);

// Central-difference gradients of batch_loss_value, perturbing one
// scalar at a time. Slow; used to validate `backward`.
GradientSet finite_diff_gradients(const BatchView& batch, const ParameterSet& params,
                                  const Matrix& semantics,
                                  const std::vector<int>& seen_classes,
                                  const ModelConfig& model_config,
                                  const LossConfig& loss_config, TrainStage stage,
                                  double h = 1e-5);

}  // namespace alrn
