// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/nn/graph.hpp"

namespace condfoley::nn {

// x [N,C,H,W], w [O,C,kh,kw], b [O]; zero padding. im2col + GEMM, with the
// per-sample loops parallelized over OpenMP threads.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride_h, int stride_w,
              int pad_h, int pad_w);

Tensor upsample2x(const Tensor& x);                 // [N,C,H,W] -> [N,C,2H,2W] nearest
Tensor avg_pool2d(const Tensor& x, int k);          // k x k blocks, stride k
Tensor mean_spatial(const Tensor& x);               // [N,C,H,W] -> [N,C]

}  // namespace condfoley::nn
