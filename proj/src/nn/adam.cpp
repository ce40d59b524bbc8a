// SPDX-License-Identifier: Apache-2.0
#include "condfoley/nn/adam.hpp"

#include <cmath>

namespace condfoley::nn {

Adam::Adam(std::vector<Tensor> params, float lr, float beta1, float beta2, float eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p->value.shape);
        v_.emplace_back(p->value.shape);
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) {
        if (p->grad_alloc) p->grad.fill(0.0f);
    }
}

float Adam::clip_grad_norm(float max_norm) {
    double sq = 0.0;
    for (const auto& p : params_) {
        if (!p->grad_alloc) continue;
        for (int64_t i = 0; i < p->grad.size(); ++i)
            sq += static_cast<double>(p->grad[i]) * p->grad[i];
    }
    const float norm = static_cast<float>(std::sqrt(sq));
    if (max_norm > 0.0f && norm > max_norm) {
        const float s = max_norm / (norm + 1e-12f);
        for (auto& p : params_) {
            if (!p->grad_alloc) continue;
            for (int64_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= s;
        }
    }
    return norm;
}

void Adam::step() {
    ++t_;
    const float bc1 = 1.0f - std::pow(beta1_, static_cast<float>(t_));
    const float bc2 = 1.0f - std::pow(beta2_, static_cast<float>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i];
        if (!p->grad_alloc) continue;
        auto& m = m_[i];
        auto& v = v_[i];
        for (int64_t j = 0; j < p->value.size(); ++j) {
            const float g = p->grad[j];
            m[j] = beta1_ * m[j] + (1.0f - beta1_) * g;
            v[j] = beta2_ * v[j] + (1.0f - beta2_) * g * g;
            const float mh = m[j] / bc1;
            const float vh = v[j] / bc2;
            p->value[j] -= lr_ * mh / (std::sqrt(vh) + eps_);
        }
    }
}

}  // namespace condfoley::nn
