#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "alrn/tensor.hpp"

namespace alrn {

enum class RevisionActivation { kSigmoid, kSoftmax };

// Structure flags for the attribute head. Ablation variants share one
// forward implementation and are selected here.
struct ModelConfig {
  int num_attributes = 0;   // N_A
  int feature_channels = 0; // channels the four attribute kernels read
  // Channels of the raw input feature map. 0 means the adapter is the
  // identity and the kernels read the input directly; otherwise a
  // learnable per-pixel linear map adapter_channels -> feature_channels
  // is applied first (trained only in the end-to-end stage).
  int adapter_channels = 0;
  bool use_scu = true;     // gate-based local/global fusion
  bool use_global = true;  // pooled global feature path
  bool use_arm = true;     // image-conditioned semantic revision
  RevisionActivation revision_activation = RevisionActivation::kSigmoid;

  bool has_adapter() const { return adapter_channels > 0; }
  int input_channels() const {
    return has_adapter() ? adapter_channels : feature_channels;
  }
};

// The four attribute-head kernels plus the optional adapter. Every
// matrix is [num_attributes x feature_channels] with a matching bias.
struct ParameterSet {
  Matrix attention_weight;  // scores feeding the spatial softmax
  Vector attention_bias;
  Matrix saliency_weight;   // per-position attribute saliency
  Vector saliency_bias;
  Matrix gate_weight;       // local/global mixing gate
  Vector gate_bias;
  Matrix revision_weight;   // semantic revision head
  Vector revision_bias;
  Matrix adapter_weight;    // [feature_channels x adapter_channels]; empty = identity
  Vector adapter_bias;

  bool has_adapter() const { return adapter_weight.rows > 0; }
};

// Gradient buffers mirror the parameter layout exactly.
using GradientSet = ParameterSet;

ParameterSet zeros_like(const ParameterSet& params);

// Named view over every trainable buffer, in a fixed order. Used by the
// optimizer, the finite-difference oracle, and checkpoint io.
struct ParamBufferRef {
  const char* name;
  std::vector<double>* values;
  bool adapter;  // frozen during the kernel pretraining stage
};
std::vector<ParamBufferRef> parameter_buffers(ParameterSet& params);

struct ConstParamBufferRef {
  const char* name;
  const std::vector<double>* values;
  bool adapter;
};
std::vector<ConstParamBufferRef> parameter_buffers(const ParameterSet& params);

// All intermediates of one forward pass, retained for backprop and
// inspection. Vectors for disabled paths are left empty (except
// `revision`, which is all-ones when revision is off so that revised
// semantics degrade to the raw ones).
struct ForwardTrace {
  Tensor3 input;        // feature map after the adapter
  Tensor3 attention;    // per-attribute spatial weights; channels sum to 1
  Tensor3 saliency;     // per-position attribute saliency values
  Vector local;         // attention-weighted saliency, one value per attribute
  Vector global;        // spatially averaged saliency
  Vector gate_pre;      // pooled gate pre-activations
  Vector gate;          // sigmoid gate in (0,1)
  Vector fused;         // final predicted attribute vector
  Vector revision_pre;  // pooled revision pre-activations
  Vector revision;      // per-attribute revision weights
};

// Column i is the image-conditioned semantic vector of class i.
struct RevisedSemantics {
  Matrix psi;  // [num_attributes x num_classes]
};

// Glorot-uniform weights, zero biases. Identical seed gives bitwise
// identical parameters.
ParameterSet init_parameters(const ModelConfig& config, std::uint64_t seed);

struct AlmOutput {
  Tensor3 attention;
  Tensor3 saliency;
  Vector local;
};

// attention = spatial_softmax(conv1x1(x, attention kernel));
// saliency = conv1x1(x, saliency kernel);
// local[n] = sum over positions of attention[n,..] * saliency[n,..]
AlmOutput alm_forward(const Tensor3& x, const ParameterSet& params);

Vector global_feature(const Tensor3& saliency);

// sigmoid of the spatially pooled gate pre-activations
Vector scale_gate(const Tensor3& x, const ParameterSet& params);

// Gate fusion when both paths are on; plain average without the gate
// unit; local path alone when the global feature is off.
Vector fuse(const Vector& local, const Vector& global, const Vector& gate,
            const ModelConfig& config);

// Per-attribute revision weights: activation of the pooled revision
// pre-activations, or all-ones when revision is disabled.
Vector revision_vector(const Tensor3& x, const ParameterSet& params,
                       const ModelConfig& config);

// psi[n,i] = revision[n] * semantics[n,i]
RevisedSemantics revise_semantics(const Vector& revision, const Matrix& semantics);

// Full head: adapter, attribute localization, global feature, gate
// fusion, revision. Pure function of its inputs.
std::pair<ForwardTrace, RevisedSemantics> model_forward(const Tensor3& x_raw,
                                                        const ParameterSet& params,
                                                        const Matrix& semantics,
                                                        const ModelConfig& config);

}  // namespace alrn
