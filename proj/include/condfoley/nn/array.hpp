// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "condfoley/common.hpp"

namespace condfoley::nn {

// Dense row-major float array, up to 5 dims. The workhorse value type for
// both the autograd graph and plain inference kernels.
struct NdArray {
    std::vector<int> shape;
    std::vector<float> v;

    NdArray() = default;
    explicit NdArray(std::vector<int> s) : shape(std::move(s)), v(count(shape), 0.0f) {}
    NdArray(std::vector<int> s, float fill) : shape(std::move(s)), v(count(shape), fill) {}

    static int64_t count(const std::vector<int>& s) {
        int64_t n = 1;
        for (int d : s) n *= d;
        return n;
    }

    static NdArray zeros(std::vector<int> s) { return NdArray(std::move(s)); }
    static NdArray full(std::vector<int> s, float x) { return NdArray(std::move(s), x); }
    static NdArray randn(std::vector<int> s, Rng& rng, float stddev) {
        NdArray a(std::move(s));
        for (auto& x : a.v) x = rng.normal() * stddev;
        return a;
    }

    int64_t size() const { return static_cast<int64_t>(v.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    float* data() { return v.data(); }
    const float* data() const { return v.data(); }

    float& operator[](int64_t i) { return v[static_cast<size_t>(i)]; }
    const float& operator[](int64_t i) const { return v[static_cast<size_t>(i)]; }

    float& at(int i, int j) { return v[static_cast<size_t>(i) * shape[1] + j]; }
    float at(int i, int j) const { return v[static_cast<size_t>(i) * shape[1] + j]; }
    float& at(int i, int j, int k) {
        return v[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    float at(int i, int j, int k) const {
        return v[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
    }

    bool same_shape(const NdArray& o) const { return shape == o.shape; }

    void fill(float x) { std::fill(v.begin(), v.end(), x); }

    bool all_finite() const {
        for (float x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

}  // namespace condfoley::nn
