#pragma once

#include "alrn/tensor.hpp"

namespace alrn {

// Norm guard for cosine similarity on (near-)zero vectors.
inline constexpr double kNormEpsilon = 1e-12;

// out[k,i,j] = bias[k] + sum_c weight[k,c] * input[c,i,j]
Tensor3 conv1x1(const Tensor3& input, const Matrix& weight, const Vector& bias);

// Per-channel softmax over spatial positions (max-subtracted for
// stability); each output channel sums to 1.
Tensor3 spatial_softmax(const Tensor3& input);

// out[k] = mean over spatial positions of input[k,.,.]
Vector spatial_mean(const Tensor3& input);

double stable_sigmoid(double x);
Vector sigmoid(const Vector& v);

// Stable softmax over the whole vector; sums to 1.
Vector softmax(const Vector& v);

// a.b / (max(|a|, eps) * max(|b|, eps))
double cosine_similarity(const Vector& a, const Vector& b);

}  // namespace alrn
