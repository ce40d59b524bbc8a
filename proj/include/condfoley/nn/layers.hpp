// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "condfoley/nn/conv.hpp"
#include "condfoley/nn/ops.hpp"

namespace condfoley::nn {

// Owns all trainable tensors of a model, keyed by module path. Iteration
// order is the key order, so optimizers and checkpoints are deterministic.
struct ParamStore {
    std::map<std::string, Tensor> params;

    Tensor add(const std::string& name, NdArray init) {
        require(!params.count(name), "ParamStore: duplicate param " + name);
        auto t = param(std::move(init));
        params[name] = t;
        return t;
    }
    Tensor get(const std::string& name) const { return params.at(name); }
    std::vector<Tensor> all() const {
        std::vector<Tensor> out;
        out.reserve(params.size());
        for (const auto& [k, v] : params) out.push_back(v);
        return out;
    }
    int64_t count() const {
        int64_t n = 0;
        for (const auto& [k, v] : params) n += v->value.size();
        return n;
    }
};

struct Linear {
    Tensor w, b;  // w [in, out]

    static Linear create(ParamStore& ps, const std::string& prefix, int in, int out, Rng& rng,
                         float w_std = -1.0f) {
        Linear l;
        if (w_std < 0.0f) w_std = std::sqrt(2.0f / static_cast<float>(in + out));
        l.w = ps.add(prefix + ".w", NdArray::randn({in, out}, rng, w_std));
        l.b = ps.add(prefix + ".b", NdArray({out}));
        return l;
    }
    Tensor operator()(const Tensor& x) const { return add_bias(matmul(x, w), b); }
};

struct Conv2dLayer {
    Tensor w, b;
    int sh = 1, sw = 1, ph = 0, pw = 0;

    static Conv2dLayer create(ParamStore& ps, const std::string& prefix, int in_ch, int out_ch,
                              int kh, int kw, int sh, int sw, int ph, int pw, Rng& rng) {
        Conv2dLayer c;
        const float std = std::sqrt(2.0f / static_cast<float>(in_ch * kh * kw));
        c.w = ps.add(prefix + ".w", NdArray::randn({out_ch, in_ch, kh, kw}, rng, std));
        c.b = ps.add(prefix + ".b", NdArray({out_ch}));
        c.sh = sh;
        c.sw = sw;
        c.ph = ph;
        c.pw = pw;
        return c;
    }
    Tensor operator()(const Tensor& x) const { return conv2d(x, w, b, sh, sw, ph, pw); }
};

struct GroupNormLayer {
    Tensor gamma, beta;
    int groups = 8;

    static GroupNormLayer create(ParamStore& ps, const std::string& prefix, int channels,
                                 int groups) {
        GroupNormLayer g;
        g.gamma = ps.add(prefix + ".gamma", NdArray::full({channels}, 1.0f));
        g.beta = ps.add(prefix + ".beta", NdArray({channels}));
        g.groups = groups;
        return g;
    }
    Tensor operator()(const Tensor& x) const { return group_norm(x, groups, gamma, beta); }
};

struct LayerNormLayer {
    Tensor gamma, beta;

    static LayerNormLayer create(ParamStore& ps, const std::string& prefix, int dim) {
        LayerNormLayer l;
        l.gamma = ps.add(prefix + ".gamma", NdArray::full({dim}, 1.0f));
        l.beta = ps.add(prefix + ".beta", NdArray({dim}));
        return l;
    }
    Tensor operator()(const Tensor& x) const { return layer_norm(x, gamma, beta); }
};

}  // namespace condfoley::nn
