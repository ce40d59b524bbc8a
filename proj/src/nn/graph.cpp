// SPDX-License-Identifier: Apache-2.0
#include "condfoley/nn/graph.hpp"

#include <unordered_set>

namespace condfoley::nn {

Tensor constant(NdArray value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    return n;
}

Tensor leaf(NdArray value, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return n;
}

void backward(const Tensor& root) {
    require(root->value.size() == 1, "backward: root must be a scalar");

    // iterative post-order DFS -> topological order
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node* p = node->parents[idx].get();
            ++idx;
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad().fill(1.0f);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && n->grad_alloc) n->backward_fn(*n);
    }
}

}  // namespace condfoley::nn
