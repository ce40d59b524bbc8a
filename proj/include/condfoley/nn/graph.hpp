// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "condfoley/nn/array.hpp"

namespace condfoley::nn {

// Reverse-mode autograd over a dynamic DAG. Nodes own their forward value;
// gradients are allocated on demand during backward(). Ops append nodes whose
// backward closures accumulate into their parents.
struct Node;
using Tensor = std::shared_ptr<Node>;

struct Node {
    NdArray value;
    NdArray grad;
    std::vector<Tensor> parents;
    std::function<void(Node&)> backward_fn;
    bool requires_grad = false;
    bool grad_alloc = false;

    NdArray& ensure_grad() {
        if (!grad_alloc) {
            grad = NdArray(value.shape);
            grad_alloc = true;
        }
        return grad;
    }
    void drop_grad() {
        grad = NdArray();
        grad_alloc = false;
    }
};

Tensor constant(NdArray value);
Tensor leaf(NdArray value, bool requires_grad);
inline Tensor param(NdArray value) { return leaf(std::move(value), true); }

// Backpropagate from a scalar root (shape [1]).
void backward(const Tensor& root);

}  // namespace condfoley::nn
