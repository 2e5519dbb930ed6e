#include "alrn/model.hpp"

#include <cmath>
#include <string>

#include "alrn/ops.hpp"
#include "alrn/rng.hpp"

namespace alrn {
namespace {

Matrix glorot_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  const double bound = std::sqrt(6.0 / (rows + cols));
  for (double& v : m.data) v = rng.uniform(-bound, bound);
  return m;
}

void check_kernel(const Matrix& w, const Vector& b, int num_attributes,
                  int channels, const char* name) {
  check_shape(w.rows == num_attributes && w.cols == channels,
              std::string(name) + " weight is " + std::to_string(w.rows) + "x" +
                  std::to_string(w.cols) + ", expected " +
                  std::to_string(num_attributes) + "x" + std::to_string(channels));
  check_shape(static_cast<int>(b.size()) == num_attributes,
              std::string(name) + " bias has " + std::to_string(b.size()) +
                  " entries, expected " + std::to_string(num_attributes));
}

}  // namespace

ParameterSet zeros_like(const ParameterSet& params) {
  ParameterSet z;
  z.attention_weight = Matrix(params.attention_weight.rows, params.attention_weight.cols);
  z.attention_bias.assign(params.attention_bias.size(), 0.0);
  z.saliency_weight = Matrix(params.saliency_weight.rows, params.saliency_weight.cols);
  z.saliency_bias.assign(params.saliency_bias.size(), 0.0);
  z.gate_weight = Matrix(params.gate_weight.rows, params.gate_weight.cols);
  z.gate_bias.assign(params.gate_bias.size(), 0.0);
  z.revision_weight = Matrix(params.revision_weight.rows, params.revision_weight.cols);
  z.revision_bias.assign(params.revision_bias.size(), 0.0);
  z.adapter_weight = Matrix(params.adapter_weight.rows, params.adapter_weight.cols);
  z.adapter_bias.assign(params.adapter_bias.size(), 0.0);
  return z;
}

std::vector<ParamBufferRef> parameter_buffers(ParameterSet& params) {
  std::vector<ParamBufferRef> refs = {
      {"attention_weight", &params.attention_weight.data, false},
      {"attention_bias", &params.attention_bias, false},
      {"saliency_weight", &params.saliency_weight.data, false},
      {"saliency_bias", &params.saliency_bias, false},
      {"gate_weight", &params.gate_weight.data, false},
      {"gate_bias", &params.gate_bias, false},
      {"revision_weight", &params.revision_weight.data, false},
      {"revision_bias", &params.revision_bias, false},
  };
  if (params.has_adapter()) {
    refs.push_back({"adapter_weight", &params.adapter_weight.data, true});
    refs.push_back({"adapter_bias", &params.adapter_bias, true});
  }
  return refs;
}

std::vector<ConstParamBufferRef> parameter_buffers(const ParameterSet& params) {
  auto refs = parameter_buffers(const_cast<ParameterSet&>(params));
  std::vector<ConstParamBufferRef> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back({r.name, r.values, r.adapter});
  return out;
}

ParameterSet init_parameters(const ModelConfig& config, std::uint64_t seed) {
  check_shape(config.num_attributes > 0 && config.feature_channels > 0,
              "model config needs positive attribute and channel counts");
  Rng rng(seed, "model-init");
  ParameterSet p;
  const int na = config.num_attributes;
  const int c = config.feature_channels;
  p.attention_weight = glorot_matrix(na, c, rng);
  p.attention_bias.assign(na, 0.0);
  p.saliency_weight = glorot_matrix(na, c, rng);
  p.saliency_bias.assign(na, 0.0);
  p.gate_weight = glorot_matrix(na, c, rng);
  p.gate_bias.assign(na, 0.0);
  p.revision_weight = glorot_matrix(na, c, rng);
  p.revision_bias.assign(na, 0.0);
  if (config.has_adapter()) {
    p.adapter_weight = glorot_matrix(c, config.adapter_channels, rng);
    p.adapter_bias.assign(c, 0.0);
  }
  return p;
}

AlmOutput alm_forward(const Tensor3& x, const ParameterSet& params) {
  AlmOutput out;
  out.attention = spatial_softmax(conv1x1(x, params.attention_weight, params.attention_bias));
  out.saliency = conv1x1(x, params.saliency_weight, params.saliency_bias);
  const int na = out.attention.channels;
  const int hw = out.attention.spatial();
  out.local.assign(na, 0.0);
  for (int n = 0; n < na; ++n) {
    const double* w = out.attention.channel(n);
    const double* v = out.saliency.channel(n);
    double acc = 0.0;
    for (int p = 0; p < hw; ++p) acc += w[p] * v[p];
    out.local[n] = acc;
  }
  return out;
}

Vector global_feature(const Tensor3& saliency) { return spatial_mean(saliency); }

Vector scale_gate(const Tensor3& x, const ParameterSet& params) {
  return sigmoid(spatial_mean(conv1x1(x, params.gate_weight, params.gate_bias)));
}

Vector fuse(const Vector& local, const Vector& global, const Vector& gate,
            const ModelConfig& config) {
  if (!config.use_global) return local;
  check_shape(local.size() == global.size(), "local/global feature size mismatch");
  Vector out(local.size());
  if (config.use_scu) {
    check_shape(gate.size() == local.size(), "gate size mismatch");
    for (std::size_t n = 0; n < out.size(); ++n)
      out[n] = gate[n] * local[n] + (1.0 - gate[n]) * global[n];
  } else {
    for (std::size_t n = 0; n < out.size(); ++n)
      out[n] = 0.5 * (local[n] + global[n]);
  }
  return out;
}

Vector revision_vector(const Tensor3& x, const ParameterSet& params,
                       const ModelConfig& config) {
  if (!config.use_arm) return Vector(config.num_attributes, 1.0);
  Vector pre = spatial_mean(conv1x1(x, params.revision_weight, params.revision_bias));
  if (config.revision_activation == RevisionActivation::kSoftmax) return softmax(pre);
  return sigmoid(pre);
}

RevisedSemantics revise_semantics(const Vector& revision, const Matrix& semantics) {
  check_shape(static_cast<int>(revision.size()) == semantics.rows,
              "revision length " + std::to_string(revision.size()) +
                  " does not match semantic rows " + std::to_string(semantics.rows));
  RevisedSemantics out;
  out.psi = Matrix(semantics.rows, semantics.cols);
  for (int n = 0; n < semantics.rows; ++n)
    for (int i = 0; i < semantics.cols; ++i)
      out.psi.at(n, i) = revision[n] * semantics.at(n, i);
  return out;
}

std::pair<ForwardTrace, RevisedSemantics> model_forward(const Tensor3& x_raw,
                                                        const ParameterSet& params,
                                                        const Matrix& semantics,
                                                        const ModelConfig& config) {
  check_shape(x_raw.channels == config.input_channels(),
              "input has " + std::to_string(x_raw.channels) + " channels, expected " +
                  std::to_string(config.input_channels()));
  check_kernel(params.attention_weight, params.attention_bias, config.num_attributes,
               config.feature_channels, "attention");
  check_kernel(params.saliency_weight, params.saliency_bias, config.num_attributes,
               config.feature_channels, "saliency");
  check_shape(semantics.rows == config.num_attributes,
              "semantic matrix has " + std::to_string(semantics.rows) +
                  " rows, expected " + std::to_string(config.num_attributes));

  ForwardTrace t;
  t.input = config.has_adapter()
                ? conv1x1(x_raw, params.adapter_weight, params.adapter_bias)
                : x_raw;

  AlmOutput alm = alm_forward(t.input, params);
  t.attention = std::move(alm.attention);
  t.saliency = std::move(alm.saliency);
  t.local = std::move(alm.local);

  if (config.use_global) t.global = global_feature(t.saliency);
  if (config.use_global && config.use_scu) {
    check_kernel(params.gate_weight, params.gate_bias, config.num_attributes,
                 config.feature_channels, "gate");
    Tensor3 gate_map = conv1x1(t.input, params.gate_weight, params.gate_bias);
    t.gate_pre = spatial_mean(gate_map);
    t.gate = sigmoid(t.gate_pre);
  }
  t.fused = fuse(t.local, t.global, t.gate, config);

  if (config.use_arm) {
    check_kernel(params.revision_weight, params.revision_bias, config.num_attributes,
                 config.feature_channels, "revision");
    Tensor3 rev_map = conv1x1(t.input, params.revision_weight, params.revision_bias);
    t.revision_pre = spatial_mean(rev_map);
    t.revision = config.revision_activation == RevisionActivation::kSoftmax
                     ? softmax(t.revision_pre)
                     : sigmoid(t.revision_pre);
  } else {
    t.revision.assign(config.num_attributes, 1.0);
  }

  RevisedSemantics psi = revise_semantics(t.revision, semantics);
  return {std::move(t), std::move(psi)};
}

}  // namespace alrn
