#include "alrn/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "alrn/ops.hpp"
#include "alrn/parallel.hpp"

namespace alrn {
namespace {

void check_loss_config(const LossConfig& config) {
  if (config.tau <= 0.0) throw ConfigError("temperature must be positive");
  if (config.mse_weight < 0.0) throw ConfigError("mse weight must be non-negative");
}

std::unordered_map<int, int> seen_index_map(const std::vector<int>& seen_classes) {
  std::unordered_map<int, int> idx;
  for (int k = 0; k < static_cast<int>(seen_classes.size()); ++k)
    idx.emplace(seen_classes[k], k);
  return idx;
}

int seen_index_of(const std::unordered_map<int, int>& idx, int label) {
  auto it = idx.find(label);
  if (it == idx.end())
    throw ConfigError("label " + std::to_string(label) + " is not a seen class");
  return it->second;
}

Vector semantic_column(const Matrix& m, int col) {
  Vector v(m.rows);
  for (int n = 0; n < m.rows; ++n) v[n] = m.at(n, col);
  return v;
}

// dw[n,c] += sum_p dout[n,p] x[c,p]; db[n] += sum_p dout[n,p];
// dx[c,p] += sum_n dout[n,p] w[n,c] when dx is given.
void conv1x1_backward(const Tensor3& x, const Matrix& w, const Tensor3& dout,
                      Matrix& dw, Vector& db, Tensor3* dx) {
  const int hw = x.spatial();
  for (int n = 0; n < dout.channels; ++n) {
    const double* dn = dout.channel(n);
    double bias_acc = 0.0;
    for (int p = 0; p < hw; ++p) bias_acc += dn[p];
    db[n] += bias_acc;
    for (int c = 0; c < x.channels; ++c) {
      const double* xc = x.channel(c);
      double acc = 0.0;
      for (int p = 0; p < hw; ++p) acc += dn[p] * xc[p];
      dw.at(n, c) += acc;
    }
  }
  if (dx) {
    for (int n = 0; n < dout.channels; ++n) {
      const double* dn = dout.channel(n);
      for (int c = 0; c < x.channels; ++c) {
        double* dxc = dx->channel(c);
        const double wnc = w.at(n, c);
        for (int p = 0; p < hw; ++p) dxc[p] += dn[p] * wnc;
      }
    }
  }
}

struct SampleResult {
  GradientSet grads;
  double ce = 0.0;
  double mse = 0.0;
  Vector logits;
};

// Gradients of ce + mse_weight * mse for one sample, unscaled by the
// batch size. Mirrors model_forward step by step in reverse.
SampleResult sample_backward(const Tensor3& x_raw, int label, int label_seen_idx,
                             const ParameterSet& params, const Matrix& semantics,
                             const std::vector<int>& seen_classes,
                             const ModelConfig& mc, const LossConfig& lc,
                             TrainStage stage) {
  SampleResult out;
  out.grads = zeros_like(params);

  auto [t, rs] = model_forward(x_raw, params, semantics, mc);
  const int na = mc.num_attributes;
  const int num_seen = static_cast<int>(seen_classes.size());
  const Vector& phi = t.fused;

  double phi_norm_raw = 0.0;
  for (double v : phi) phi_norm_raw += v * v;
  phi_norm_raw = std::sqrt(phi_norm_raw);
  const double phi_norm = std::max(phi_norm_raw, kNormEpsilon);

  // Scores against every seen class's revised semantics.
  out.logits.assign(num_seen, 0.0);
  Matrix psi_seen(num_seen, na);
  Vector psi_norm_raw(num_seen), psi_dot(num_seen);
  for (int k = 0; k < num_seen; ++k) {
    double norm2 = 0.0, dot = 0.0;
    for (int n = 0; n < na; ++n) {
      const double v = rs.psi.at(n, seen_classes[k]);
      psi_seen.at(k, n) = v;
      norm2 += v * v;
      dot += v * phi[n];
    }
    psi_norm_raw[k] = std::sqrt(norm2);
    psi_dot[k] = dot;
    out.logits[k] =
        lc.tau * dot / (phi_norm * std::max(psi_norm_raw[k], kNormEpsilon));
  }
  out.ce = cross_entropy_from_logits(out.logits, label_seen_idx);

  // dz = softmax(z) - onehot(target)
  Vector dz(num_seen);
  {
    const double m = *std::max_element(out.logits.begin(), out.logits.end());
    double sum = 0.0;
    for (int k = 0; k < num_seen; ++k) {
      dz[k] = std::exp(out.logits[k] - m);
      sum += dz[k];
    }
    for (double& v : dz) v /= sum;
    dz[label_seen_idx] -= 1.0;
  }

  Vector dphi(na, 0.0);
  Vector dr(na, 0.0);

  // Cosine backward per seen class. Below the norm guard the norm is a
  // constant, so its derivative term drops out.
  for (int k = 0; k < num_seen; ++k) {
    const double coef = dz[k] * lc.tau;
    if (coef == 0.0) continue;
    const double pn = std::max(psi_norm_raw[k], kNormEpsilon);
    const double inv = 1.0 / (phi_norm * pn);
    const double cos_k = psi_dot[k] * inv;
    const double phi_term = phi_norm_raw > kNormEpsilon ? cos_k / (phi_norm * phi_norm) : 0.0;
    const double psi_term = psi_norm_raw[k] > kNormEpsilon ? cos_k / (pn * pn) : 0.0;
    for (int n = 0; n < na; ++n) {
      dphi[n] += coef * (psi_seen.at(k, n) * inv - phi_term * phi[n]);
      dr[n] += coef * (phi[n] * inv - psi_term * psi_seen.at(k, n)) *
               semantics.at(n, seen_classes[k]);
    }
  }

  // Squared-error term against the true class.
  for (int n = 0; n < na; ++n) {
    const double diff = phi[n] - t.revision[n] * semantics.at(n, label);
    out.mse += diff * diff;
    dphi[n] += lc.mse_weight * 2.0 * diff;
    dr[n] -= lc.mse_weight * 2.0 * diff * semantics.at(n, label);
  }

  const int hw = t.input.spatial();
  const Vector xbar = spatial_mean(t.input);
  const bool need_dx = mc.has_adapter() && stage == TrainStage::kEndToEnd;
  // Pooled heads touch the input uniformly: dx[c,p] += dx_uniform[c].
  Vector dx_uniform(t.input.channels, 0.0);

  if (mc.use_arm) {
    Vector dr_pre(na);
    if (mc.revision_activation == RevisionActivation::kSoftmax) {
      double mix = 0.0;
      for (int n = 0; n < na; ++n) mix += dr[n] * t.revision[n];
      for (int n = 0; n < na; ++n) dr_pre[n] = t.revision[n] * (dr[n] - mix);
    } else {
      for (int n = 0; n < na; ++n)
        dr_pre[n] = dr[n] * t.revision[n] * (1.0 - t.revision[n]);
    }
    for (int n = 0; n < na; ++n) {
      out.grads.revision_bias[n] += dr_pre[n];
      for (int c = 0; c < t.input.channels; ++c)
        out.grads.revision_weight.at(n, c) += dr_pre[n] * xbar[c];
    }
    if (need_dx)
      for (int c = 0; c < t.input.channels; ++c) {
        double acc = 0.0;
        for (int n = 0; n < na; ++n) acc += dr_pre[n] * params.revision_weight.at(n, c);
        dx_uniform[c] += acc / hw;
      }
  }

  Vector dlocal(na, 0.0), dglobal(na, 0.0);
  if (mc.use_global && mc.use_scu) {
    Vector dgate(na);
    for (int n = 0; n < na; ++n) {
      dlocal[n] = dphi[n] * t.gate[n];
      dglobal[n] = dphi[n] * (1.0 - t.gate[n]);
      dgate[n] = dphi[n] * (t.local[n] - t.global[n]);
    }
    Vector dg_pre(na);
    for (int n = 0; n < na; ++n) dg_pre[n] = dgate[n] * t.gate[n] * (1.0 - t.gate[n]);
    for (int n = 0; n < na; ++n) {
      out.grads.gate_bias[n] += dg_pre[n];
      for (int c = 0; c < t.input.channels; ++c)
        out.grads.gate_weight.at(n, c) += dg_pre[n] * xbar[c];
    }
    if (need_dx)
      for (int c = 0; c < t.input.channels; ++c) {
        double acc = 0.0;
        for (int n = 0; n < na; ++n) acc += dg_pre[n] * params.gate_weight.at(n, c);
        dx_uniform[c] += acc / hw;
      }
  } else if (mc.use_global) {
    for (int n = 0; n < na; ++n) {
      dlocal[n] = 0.5 * dphi[n];
      dglobal[n] = 0.5 * dphi[n];
    }
  } else {
    dlocal = dphi;
  }

  // local[n] = sum_p W[n,p] V[n,p]; global[n] = mean_p V[n,p]
  Tensor3 dV(na, t.input.height, t.input.width);
  Tensor3 dWmap(na, t.input.height, t.input.width);
  for (int n = 0; n < na; ++n) {
    const double* w = t.attention.channel(n);
    const double* v = t.saliency.channel(n);
    double* dv = dV.channel(n);
    double* dwm = dWmap.channel(n);
    const double g_term = mc.use_global ? dglobal[n] / hw : 0.0;
    for (int p = 0; p < hw; ++p) {
      dv[p] = g_term + dlocal[n] * w[p];
      dwm[p] = dlocal[n] * v[p];
    }
  }

  // Softmax backward, per attribute channel.
  Tensor3 dA(na, t.input.height, t.input.width);
  for (int n = 0; n < na; ++n) {
    const double* w = t.attention.channel(n);
    const double* dwm = dWmap.channel(n);
    double* da = dA.channel(n);
    double mix = 0.0;
    for (int p = 0; p < hw; ++p) mix += dwm[p] * w[p];
    for (int p = 0; p < hw; ++p) da[p] = w[p] * (dwm[p] - mix);
  }

  Tensor3 dx;
  if (need_dx) dx = Tensor3(t.input.channels, t.input.height, t.input.width);
  conv1x1_backward(t.input, params.attention_weight, dA, out.grads.attention_weight,
                   out.grads.attention_bias, need_dx ? &dx : nullptr);
  conv1x1_backward(t.input, params.saliency_weight, dV, out.grads.saliency_weight,
                   out.grads.saliency_bias, need_dx ? &dx : nullptr);

  if (need_dx) {
    for (int c = 0; c < dx.channels; ++c) {
      double* dxc = dx.channel(c);
      for (int p = 0; p < hw; ++p) dxc[p] += dx_uniform[c];
    }
    conv1x1_backward(x_raw, params.adapter_weight, dx, out.grads.adapter_weight,
                     out.grads.adapter_bias, nullptr);
  }
  return out;
}

void check_batch(const BatchView& batch) {
  check_shape(!batch.images.empty(), "batch is empty");
  check_shape(batch.images.size() == batch.labels.size(),
              "batch has " + std::to_string(batch.images.size()) + " images but " +
                  std::to_string(batch.labels.size()) + " labels");
}

}  // namespace

double cross_entropy_from_logits(const Vector& logits, int target) {
  check_shape(target >= 0 && target < static_cast<int>(logits.size()),
              "cross entropy target out of range");
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  return m + std::log(sum) - logits[target];
}

std::pair<double, Matrix> ce_loss(const std::vector<ForwardTrace>& traces,
                                  const std::vector<RevisedSemantics>& revised,
                                  const std::vector<int>& labels,
                                  const std::vector<int>& seen_classes,
                                  const LossConfig& config) {
  check_loss_config(config);
  check_shape(traces.size() == labels.size() && revised.size() == labels.size(),
              "trace/label count mismatch");
  check_shape(!seen_classes.empty(), "no seen classes");
  const auto idx = seen_index_map(seen_classes);
  const int num_seen = static_cast<int>(seen_classes.size());
  Matrix logits(static_cast<int>(labels.size()), num_seen);
  double total = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    Vector row(num_seen);
    for (int k = 0; k < num_seen; ++k)
      row[k] = config.tau * cosine_similarity(
                                traces[b].fused,
                                semantic_column(revised[b].psi, seen_classes[k]));
    total += cross_entropy_from_logits(row, seen_index_of(idx, labels[b]));
    for (int k = 0; k < num_seen; ++k) logits.at(static_cast<int>(b), k) = row[k];
  }
  return {total / static_cast<double>(labels.size()), std::move(logits)};
}

double mse_loss(const std::vector<ForwardTrace>& traces,
                const std::vector<RevisedSemantics>& revised,
                const std::vector<int>& labels) {
  check_shape(traces.size() == labels.size() && revised.size() == labels.size(),
              "trace/label count mismatch");
  double total = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const Vector& phi = traces[b].fused;
    check_shape(labels[b] >= 0 && labels[b] < revised[b].psi.cols,
                "label " + std::to_string(labels[b]) + " outside semantic matrix");
    for (std::size_t n = 0; n < phi.size(); ++n) {
      const double diff = phi[n] - revised[b].psi.at(static_cast<int>(n), labels[b]);
      total += diff * diff;
    }
  }
  return total / static_cast<double>(labels.size());
}

BatchLoss total_loss(const std::vector<ForwardTrace>& traces,
                     const std::vector<RevisedSemantics>& revised,
                     const std::vector<int>& labels,
                     const std::vector<int>& seen_classes,
                     const LossConfig& config) {
  BatchLoss loss;
  auto [ce, logits] = ce_loss(traces, revised, labels, seen_classes, config);
  loss.cross_entropy = ce;
  loss.logits = std::move(logits);
  loss.mse = mse_loss(traces, revised, labels);
  loss.total = loss.cross_entropy + config.mse_weight * loss.mse;
  return loss;
}

double batch_loss_value(const BatchView& batch, const ParameterSet& params,
                        const Matrix& semantics, const std::vector<int>& seen_classes,
                        const ModelConfig& model_config, const LossConfig& loss_config) {
  check_batch(batch);
  std::vector<ForwardTrace> traces(batch.images.size());
  std::vector<RevisedSemantics> revised(batch.images.size());
  for (std::size_t b = 0; b < batch.images.size(); ++b) {
    auto [t, rs] = model_forward(*batch.images[b], params, semantics, model_config);
    traces[b] = std::move(t);
    revised[b] = std::move(rs);
  }
  return total_loss(traces, revised, batch.labels, seen_classes, loss_config).total;
}

GradientSet backward(const BatchView& batch, const ParameterSet& params,
                     const Matrix& semantics, const std::vector<int>& seen_classes,
                     const ModelConfig& model_config, const LossConfig& loss_config,
                     TrainStage stage, BatchLoss* loss_out) {
  check_batch(batch);
  check_loss_config(loss_config);
  check_shape(!seen_classes.empty(), "no seen classes");
  const auto idx = seen_index_map(seen_classes);
  const std::size_t n = batch.images.size();

  std::vector<int> seen_idx(n);
  for (std::size_t b = 0; b < n; ++b) seen_idx[b] = seen_index_of(idx, batch.labels[b]);

  std::vector<SampleResult> results(n);
  parallel_for(n, [&](std::size_t b) {
    results[b] = sample_backward(*batch.images[b], batch.labels[b], seen_idx[b], params,
                                 semantics, seen_classes, model_config, loss_config, stage);
  });

  // Index-order reduction keeps the sum bitwise deterministic.
  GradientSet grads = zeros_like(params);
  auto acc_refs = parameter_buffers(grads);
  double ce_sum = 0.0, mse_sum = 0.0;
  Matrix logits(static_cast<int>(n), static_cast<int>(seen_classes.size()));
  for (std::size_t b = 0; b < n; ++b) {
    auto part_refs = parameter_buffers(results[b].grads);
    for (std::size_t r = 0; r < acc_refs.size(); ++r) {
      const std::vector<double>& src = *part_refs[r].values;
      std::vector<double>& dst = *acc_refs[r].values;
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    ce_sum += results[b].ce;
    mse_sum += results[b].mse;
    for (std::size_t k = 0; k < results[b].logits.size(); ++k)
      logits.at(static_cast<int>(b), static_cast<int>(k)) = results[b].logits[k];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& ref : acc_refs)
    for (double& v : *ref.values) v *= inv_n;

  if (loss_out) {
    loss_out->cross_entropy = ce_sum * inv_n;
    loss_out->mse = mse_sum * inv_n;
    loss_out->total = loss_out->cross_entropy + loss_config.mse_weight * loss_out->mse;
    loss_out->logits = std::move(logits);
  }
  return grads;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

GradientSet finite_diff_gradients(const BatchView& batch, const ParameterSet& params,
                                  const Matrix& semantics,
                                  const std::vector<int>& seen_classes,
                                  const ModelConfig& model_config,
                                  const LossConfig& loss_config, TrainStage stage,
                                  double h) {
  ParameterSet work = params;
  GradientSet grads = zeros_like(work);
  auto work_refs = parameter_buffers(work);
  auto grad_refs = parameter_buffers(grads);
  for (std::size_t r = 0; r < work_refs.size(); ++r) {
    if (work_refs[r].adapter && stage == TrainStage::kKernelsOnly) continue;
    std::vector<double>& values = *work_refs[r].values;
    std::vector<double>& out = *grad_refs[r].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = batch_loss_value(batch, work, semantics, seen_classes,
                                         model_config, loss_config);
      values[i] = saved - h;
      const double down = batch_loss_value(batch, work, semantics, seen_classes,
                                           model_config, loss_config);
      values[i] = saved;
      out[i] = (up - down) / (2.0 * h);
    }
  }
  return grads;
}

}  // namespace alrn
