// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "condfoley/nn/graph.hpp"

namespace condfoley::nn {

class Adam {
public:
    Adam(std::vector<Tensor> params, float lr, float beta1 = 0.9f, float beta2 = 0.999f,
         float eps = 1e-8f);

    void zero_grad();
    // Global-norm gradient clip; returns the pre-clip norm.
    float clip_grad_norm(float max_norm);
    void step();
    void set_lr(float lr) { lr_ = lr; }
    float lr() const { return lr_; }

private:
    std::vector<Tensor> params_;
    std::vector<NdArray> m_, v_;
    float lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
};

}  // namespace condfoley::nn
