#include "alrn/ops.hpp"

#include <algorithm>
#include <cmath>

namespace alrn {

bool all_finite(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor3 conv1x1(const Tensor3& input, const Matrix& weight, const Vector& bias) {
  check_shape(weight.cols == input.channels,
              "conv1x1: weight has " + std::to_string(weight.cols) +
                  " input columns but tensor has " +
                  std::to_string(input.channels) + " channels");
  check_shape(static_cast<int>(bias.size()) == weight.rows,
              "conv1x1: bias length " + std::to_string(bias.size()) +
                  " does not match " + std::to_string(weight.rows) +
                  " output channels");
  const int hw = input.spatial();
  Tensor3 out(weight.rows, input.height, input.width);
  for (int k = 0; k < weight.rows; ++k) {
    double* dst = out.channel(k);
    std::fill(dst, dst + hw, bias[k]);
    for (int c = 0; c < input.channels; ++c) {
      const double w = weight.at(k, c);
      const double* src = input.channel(c);
      for (int p = 0; p < hw; ++p) dst[p] += w * src[p];
    }
  }
  return out;
}

Tensor3 spatial_softmax(const Tensor3& input) {
  const int hw = input.spatial();
  check_shape(hw >= 1, "spatial_softmax: empty spatial grid");
  Tensor3 out(input.channels, input.height, input.width);
  for (int k = 0; k < input.channels; ++k) {
    const double* src = input.channel(k);
    double* dst = out.channel(k);
    double m = src[0];
    for (int p = 1; p < hw; ++p) m = std::max(m, src[p]);
    double sum = 0.0;
    for (int p = 0; p < hw; ++p) {
      dst[p] = std::exp(src[p] - m);
      sum += dst[p];
    }
    for (int p = 0; p < hw; ++p) dst[p] /= sum;
  }
  return out;
}

Vector spatial_mean(const Tensor3& input) {
  const int hw = input.spatial();
  check_shape(hw >= 1, "spatial_mean: empty spatial grid");
  Vector out(input.channels);
  for (int k = 0; k < input.channels; ++k) {
    const double* src = input.channel(k);
    double sum = 0.0;
    for (int p = 0; p < hw; ++p) sum += src[p];
    out[k] = sum / hw;
  }
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = stable_sigmoid(v[i]);
  return out;
}

Vector softmax(const Vector& v) {
  Vector out(v.size());
  if (v.empty()) return out;
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

double cosine_similarity(const Vector& a, const Vector& b) {
  check_shape(a.size() == b.size(),
              "cosine_similarity: length " + std::to_string(a.size()) +
                  " vs " + std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::max(std::sqrt(na), kNormEpsilon);
  nb = std::max(std::sqrt(nb), kNormEpsilon);
  return dot / (na * nb);
}

}  // namespace alrn
