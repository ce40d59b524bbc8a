// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "condfoley/nn/graph.hpp"

namespace condfoley::nn {

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);
Tensor add_scalar(const Tensor& a, float s);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, float slope = 0.2f);
Tensor silu(const Tensor& a);
Tensor gelu(const Tensor& a);
Tensor tanh_t(const Tensor& a);
Tensor square(const Tensor& a);
Tensor log_sigmoid(const Tensor& a);
Tensor detach(const Tensor& a);
// Straight-through estimator: forward value is copied bit-exactly from
// `value_from`; the gradient passes through to `pass_to` unchanged.
Tensor straight_through(const Tensor& pass_to, const Tensor& value_from);
// x [..., d] + b [d]
Tensor add_bias(const Tensor& x, const Tensor& b);

// ---- reductions / losses ----
Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);
Tensor mse(const Tensor& a, const Tensor& b);
// logits [n, K]; mean cross-entropy over rows
Tensor cross_entropy_mean(const Tensor& logits, const std::vector<int>& targets);
// elementwise binary cross-entropy with logits; returns sum of w_i * bce_i
Tensor bce_with_logits(const Tensor& logits, const std::vector<float>& targets,
                       const std::vector<float>& weights);

// ---- shape ----
Tensor reshape(const Tensor& a, std::vector<int> shape);
Tensor permute(const Tensor& a, const std::vector<int>& perm);
// all inputs [n_i, d] -> [sum n_i, d]
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, int start, int len);

// ---- linear algebra ----
Tensor matmul(const Tensor& a, const Tensor& b);          // [m,k]x[k,n]
Tensor bmm(const Tensor& a, const Tensor& b);             // [B,m,k]x[B,k,n]
Tensor softmax_lastdim(const Tensor& a);

// ---- tables ----
Tensor embedding(const Tensor& table, const std::vector<int>& ids);   // [V,d],[n]->[n,d]

// ---- normalization ----
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  float eps = 1e-5f);                     // over last dim
Tensor group_norm(const Tensor& x, int groups, const Tensor& gamma, const Tensor& beta,
                  float eps = 1e-5f);                     // x [N,C,H,W]

// ---- raw GEMM helper (Eigen-backed) ----
// C[m,n] = A op * B op (+ C if accumulate); A is [m,k] (or [k,m] if ta).
void gemm(bool ta, bool tb, int m, int n, int k, const float* A, const float* B, float* C,
          bool accumulate);

}  // namespace condfoley::nn
