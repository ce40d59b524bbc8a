// SPDX-License-Identifier: Apache-2.0
#include "condfoley/nn/ops.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace condfoley::nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

Tensor unary(const Tensor& a, NdArray value, std::function<void(Node&, Node&)> back) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = a->requires_grad;
    if (n->requires_grad) {
        n->parents = {a};
        n->backward_fn = [back = std::move(back)](Node& self) {
            back(self, *self.parents[0]);
        };
    }
    return n;
}

// pointwise op with cached dy/dx
Tensor pointwise(const Tensor& a, NdArray value, std::vector<float> dydx) {
    return unary(a, std::move(value), [d = std::move(dydx)](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        for (int64_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * d[static_cast<size_t>(i)];
    });
}

}  // namespace

void gemm(bool ta, bool tb, int m, int n, int k, const float* A, const float* B, float* C,
          bool accumulate) {
    CMapMat a(A, ta ? k : m, ta ? m : k);
    CMapMat b(B, tb ? n : k, tb ? k : n);
    MapMat c(C, m, n);
    if (!ta && !tb) { accumulate ? (c.noalias() += a * b) : (c.noalias() = a * b); }
    else if (ta && !tb) { accumulate ? (c.noalias() += a.transpose() * b) : (c.noalias() = a.transpose() * b); }
    else if (!ta && tb) { accumulate ? (c.noalias() += a * b.transpose()) : (c.noalias() = a * b.transpose()); }
    else { accumulate ? (c.noalias() += a.transpose() * b.transpose()) : (c.noalias() = a.transpose() * b.transpose()); }
}

Tensor add(const Tensor& a, const Tensor& b) {
    require(a->value.same_shape(b->value), "add: shape mismatch");
    NdArray out(a->value.shape);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->requires_grad = a->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->parents = {a, b};
        n->backward_fn = [](Node& self) {
            for (auto& p : self.parents) {
                if (!p->requires_grad) continue;
                auto& g = p->ensure_grad();
                for (int64_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
            }
        };
    }
    return n;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require(a->value.same_shape(b->value), "sub: shape mismatch");
    NdArray out(a->value.shape);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] - b->value[i];
    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->requires_grad = a->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->parents = {a, b};
        n->backward_fn = [](Node& self) {
            if (self.parents[0]->requires_grad) {
                auto& g = self.parents[0]->ensure_grad();
                for (int64_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
            }
            if (self.parents[1]->requires_grad) {
                auto& g = self.parents[1]->ensure_grad();
                for (int64_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
            }
        };
    }
    return n;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require(a->value.same_shape(b->value), "mul: shape mismatch");
    NdArray out(a->value.shape);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->requires_grad = a->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->parents = {a, b};
        n->backward_fn = [](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            if (pa.requires_grad) {
                auto& g = pa.ensure_grad();
                for (int64_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * pb.value[i];
            }
            if (pb.requires_grad) {
                auto& g = pb.ensure_grad();
                for (int64_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * pa.value[i];
            }
        };
    }
    return n;
}

Tensor scale(const Tensor& a, float s) {
    NdArray out(a->value.shape);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * s;
    return unary(a, std::move(out), [s](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        for (int64_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * s;
    });
}

Tensor add_scalar(const Tensor& a, float s) {
    NdArray out(a->value.shape);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + s;
    return unary(a, std::move(out), [](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        for (int64_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    });
}

Tensor relu(const Tensor& a) {
    NdArray out(a->value.shape);
    std::vector<float> d(static_cast<size_t>(out.size()));
    for (int64_t i = 0; i < out.size(); ++i) {
        const bool pos = a->value[i] > 0.0f;
        out[i] = pos ? a->value[i] : 0.0f;
        d[static_cast<size_t>(i)] = pos ? 1.0f : 0.0f;
    }
    return pointwise(a, std::move(out), std::move(d));
}

Tensor leaky_relu(const Tensor& a, float slope) {
    NdArray out(a->value.shape);
    std::vector<float> d(static_cast<size_t>(out.size()));
    for (int64_t i = 0; i < out.size(); ++i) {
        const bool pos = a->value[i] > 0.0f;
        out[i] = pos ? a->value[i] : slope * a->value[i];
        d[static_cast<size_t>(i)] = pos ? 1.0f : slope;
    }
    return pointwise(a, std::move(out), std::move(d));
}

Tensor silu(const Tensor& a) {
    NdArray out(a->value.shape);
    std::vector<float> d(static_cast<size_t>(out.size()));
    for (int64_t i = 0; i < out.size(); ++i) {
        const float x = a->value[i];
        const float s = 1.0f / (1.0f + std::exp(-x));
        out[i] = x * s;
        d[static_cast<size_t>(i)] = s * (1.0f + x * (1.0f - s));
    }
    return pointwise(a, std::move(out), std::move(d));
}

Tensor gelu(const Tensor& a) {
    constexpr float c = 0.7978845608028654f;  // sqrt(2/pi)
    NdArray out(a->value.shape);
    std::vector<float> d(static_cast<size_t>(out.size()));
    for (int64_t i = 0; i < out.size(); ++i) {
        const float x = a->value[i];
        const float u = c * (x + 0.044715f * x * x * x);
        const float th = std::tanh(u);
        out[i] = 0.5f * x * (1.0f + th);
        const float du = c * (1.0f + 3.0f * 0.044715f * x * x);
        d[static_cast<size_t>(i)] = 0.5f * (1.0f + th) + 0.5f * x * (1.0f - th * th) * du;
    }
    return pointwise(a, std::move(out), std::move(d));
}

Tensor tanh_t(const Tensor& a) {
    NdArray out(a->value.shape);
    std::vector<float> d(static_cast<size_t>(out.size()));
    for (int64_t i = 0; i < out.size(); ++i) {
        const float th = std::tanh(a->value[i]);
        out[i] = th;
        d[static_cast<size_t>(i)] = 1.0f - th * th;
    }
    return pointwise(a, std::move(out), std::move(d));
}

Tensor square(const Tensor& a) {
    NdArray out(a->value.shape);
    std::vector<float> d(static_cast<size_t>(out.size()));
    for (int64_t i = 0; i < out.size(); ++i) {
        out[i] = a->value[i] * a->value[i];
        d[static_cast<size_t>(i)] = 2.0f * a->value[i];
    }
    return pointwise(a, std::move(out), std::move(d));
}

Tensor log_sigmoid(const Tensor& a) {
    NdArray out(a->value.shape);
    std::vector<float> d(static_cast<size_t>(out.size()));
    for (int64_t i = 0; i < out.size(); ++i) {
        const float x = a->value[i];
        // log sigmoid(x) = -softplus(-x), stable in both tails
        out[i] = x >= 0.0f ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
        d[static_cast<size_t>(i)] = 1.0f / (1.0f + std::exp(x));  // sigmoid(-x)
    }
    return pointwise(a, std::move(out), std::move(d));
}

Tensor detach(const Tensor& a) {
    auto n = std::make_shared<Node>();
    n->value = a->value;
    return n;
}

Tensor straight_through(const Tensor& pass_to, const Tensor& value_from) {
    require(pass_to->value.same_shape(value_from->value), "straight_through: shape mismatch");
    return unary(pass_to, value_from->value, [](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        for (int64_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    });
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
    const int d = b->value.dim(0);
    require(x->value.size() % d == 0, "add_bias: size not divisible by bias dim");
    NdArray out(x->value.shape);
    const int64_t rows = x->value.size() / d;
    for (int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < d; ++j)
            out[r * d + j] = x->value[r * d + j] + b->value[j];
    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->requires_grad = x->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->parents = {x, b};
        n->backward_fn = [d, rows](Node& self) {
            if (self.parents[0]->requires_grad) {
                auto& g = self.parents[0]->ensure_grad();
                for (int64_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
            }
            if (self.parents[1]->requires_grad) {
                auto& g = self.parents[1]->ensure_grad();
                for (int64_t r = 0; r < rows; ++r)
                    for (int j = 0; j < d; ++j) g[j] += self.grad[r * d + j];
            }
        };
    }
    return n;
}

Tensor sum_all(const Tensor& a) {
    double acc = 0.0;
    for (int64_t i = 0; i < a->value.size(); ++i) acc += a->value[i];
    NdArray out({1});
    out[0] = static_cast<float>(acc);
    return unary(a, std::move(out), [](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        const float gy = self.grad[0];
        for (int64_t i = 0; i < g.size(); ++i) g[i] += gy;
    });
}

Tensor mean_all(const Tensor& a) {
    const auto n = a->value.size();
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += a->value[i];
    NdArray out({1});
    out[0] = static_cast<float>(acc / static_cast<double>(n));
    return unary(a, std::move(out), [n](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        const float gy = self.grad[0] / static_cast<float>(n);
        for (int64_t i = 0; i < g.size(); ++i) g[i] += gy;
    });
}

Tensor mse(const Tensor& a, const Tensor& b) { return mean_all(square(sub(a, b))); }

Tensor cross_entropy_mean(const Tensor& logits, const std::vector<int>& targets) {
    require(logits->value.ndim() == 2, "cross_entropy: logits must be [n, K]");
    const int n = logits->value.dim(0);
    const int K = logits->value.dim(1);
    require(static_cast<int>(targets.size()) == n, "cross_entropy: target count mismatch");

    NdArray probs({n, K});
    double loss = 0.0;
    for (int r = 0; r < n; ++r) {
        const float* row = &logits->value[static_cast<int64_t>(r) * K];
        float mx = row[0];
        for (int k = 1; k < K; ++k) mx = std::max(mx, row[k]);
        double z = 0.0;
        for (int k = 0; k < K; ++k) z += std::exp(static_cast<double>(row[k] - mx));
        for (int k = 0; k < K; ++k)
            probs.at(r, k) = static_cast<float>(std::exp(static_cast<double>(row[k] - mx)) / z);
        loss += std::log(z) - static_cast<double>(row[targets[static_cast<size_t>(r)]] - mx);
    }
    NdArray out({1});
    out[0] = static_cast<float>(loss / n);

    return unary(logits, std::move(out),
                 [probs = std::move(probs), targets, n, K](Node& self, Node& pa) {
                     auto& g = pa.ensure_grad();
                     const float gy = self.grad[0] / static_cast<float>(n);
                     for (int r = 0; r < n; ++r)
                         for (int k = 0; k < K; ++k) {
                             float d = probs.at(r, k);
                             if (k == targets[static_cast<size_t>(r)]) d -= 1.0f;
                             g[static_cast<int64_t>(r) * K + k] += gy * d;
                         }
                 });
}

Tensor bce_with_logits(const Tensor& logits, const std::vector<float>& targets,
                       const std::vector<float>& weights) {
    const auto n = logits->value.size();
    require(static_cast<int64_t>(targets.size()) == n && static_cast<int64_t>(weights.size()) == n,
            "bce_with_logits: size mismatch");
    double loss = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double x = logits->value[i];
        const double t = targets[static_cast<size_t>(i)];
        const double sp_pos = x >= 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        const double sp_neg = sp_pos - x;  // softplus(-x)
        loss += weights[static_cast<size_t>(i)] * (t * sp_neg + (1.0 - t) * sp_pos);
    }
    NdArray out({1});
    out[0] = static_cast<float>(loss);
    return unary(logits, std::move(out), [targets, weights](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        const float gy = self.grad[0];
        for (int64_t i = 0; i < g.size(); ++i) {
            const float s = 1.0f / (1.0f + std::exp(-pa.value[i]));
            g[i] += gy * weights[static_cast<size_t>(i)] * (s - targets[static_cast<size_t>(i)]);
        }
    });
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
    require(NdArray::count(shape) == a->value.size(), "reshape: element count mismatch");
    NdArray out = a->value;
    out.shape = std::move(shape);
    return unary(a, std::move(out), [](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
}

namespace {

std::vector<int64_t> strides_of(const std::vector<int>& shape) {
    std::vector<int64_t> s(shape.size());
    int64_t acc = 1;
    for (int i = static_cast<int>(shape.size()) - 1; i >= 0; --i) {
        s[static_cast<size_t>(i)] = acc;
        acc *= shape[static_cast<size_t>(i)];
    }
    return s;
}

void permute_copy(const NdArray& src, const std::vector<int>& perm, NdArray& dst) {
    const int nd = src.ndim();
    const auto in_strides = strides_of(src.shape);
    std::vector<int> out_shape(static_cast<size_t>(nd));
    for (int i = 0; i < nd; ++i) out_shape[static_cast<size_t>(i)] = src.shape[static_cast<size_t>(perm[static_cast<size_t>(i)])];

    std::vector<int> idx(static_cast<size_t>(nd), 0);  // enumerates the output index
    const int64_t total = src.size();
    for (int64_t flat = 0; flat < total; ++flat) {
        int64_t src_off = 0;
        for (int i = 0; i < nd; ++i)
            src_off += static_cast<int64_t>(idx[static_cast<size_t>(i)]) * in_strides[static_cast<size_t>(perm[static_cast<size_t>(i)])];
        dst[flat] = src[src_off];
        for (int i = nd - 1; i >= 0; --i) {
            if (++idx[static_cast<size_t>(i)] < out_shape[static_cast<size_t>(i)]) break;
            idx[static_cast<size_t>(i)] = 0;
        }
    }
    dst.shape = out_shape;
}

}  // namespace

Tensor permute(const Tensor& a, const std::vector<int>& perm) {
    require(static_cast<int>(perm.size()) == a->value.ndim(), "permute: rank mismatch");
    NdArray out(a->value.shape);  // shape fixed inside permute_copy
    permute_copy(a->value, perm, out);
    return unary(a, std::move(out), [perm](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        // scatter self.grad (in output layout) back into input layout
        const int nd = static_cast<int>(perm.size());
        const auto in_strides = strides_of(pa.value.shape);
        std::vector<int> idx(static_cast<size_t>(nd), 0);
        for (int64_t flat = 0; flat < self.grad.size(); ++flat) {
            int64_t src_off = 0;
            for (int i = 0; i < nd; ++i)
                src_off += static_cast<int64_t>(idx[static_cast<size_t>(i)]) * in_strides[static_cast<size_t>(perm[static_cast<size_t>(i)])];
            g[src_off] += self.grad[flat];
            for (int i = nd - 1; i >= 0; --i) {
                if (++idx[static_cast<size_t>(i)] < self.grad.shape[static_cast<size_t>(i)]) break;
                idx[static_cast<size_t>(i)] = 0;
            }
        }
    });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_rows: empty input");
    const int d = parts[0]->value.dim(1);
    int total = 0;
    bool rg = false;
    for (const auto& p : parts) {
        require(p->value.ndim() == 2 && p->value.dim(1) == d, "concat_rows: shape mismatch");
        total += p->value.dim(0);
        rg = rg || p->requires_grad;
    }
    NdArray out({total, d});
    int row = 0;
    for (const auto& p : parts) {
        std::copy(p->value.v.begin(), p->value.v.end(), out.v.begin() + static_cast<int64_t>(row) * d);
        row += p->value.dim(0);
    }
    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->requires_grad = rg;
    if (rg) {
        n->parents = parts;
        n->backward_fn = [d](Node& self) {
            int row = 0;
            for (auto& p : self.parents) {
                const int nr = p->value.dim(0);
                if (p->requires_grad) {
                    auto& g = p->ensure_grad();
                    for (int64_t i = 0; i < static_cast<int64_t>(nr) * d; ++i)
                        g[i] += self.grad[static_cast<int64_t>(row) * d + i];
                }
                row += nr;
            }
        };
    }
    return n;
}

Tensor slice_rows(const Tensor& a, int start, int len) {
    require(a->value.ndim() == 2, "slice_rows: input must be 2-d");
    require(start >= 0 && start + len <= a->value.dim(0), "slice_rows: out of range");
    const int d = a->value.dim(1);
    NdArray out({len, d});
    std::copy(a->value.v.begin() + static_cast<int64_t>(start) * d,
              a->value.v.begin() + static_cast<int64_t>(start + len) * d, out.v.begin());
    return unary(a, std::move(out), [start, d](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        for (int64_t i = 0; i < self.grad.size(); ++i)
            g[static_cast<int64_t>(start) * d + i] += self.grad[i];
    });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a->value.ndim() == 2 && b->value.ndim() == 2, "matmul: inputs must be 2-d");
    const int m = a->value.dim(0), k = a->value.dim(1), n2 = b->value.dim(1);
    require(b->value.dim(0) == k, "matmul: inner dim mismatch");
    NdArray out({m, n2});
    gemm(false, false, m, n2, k, a->value.data(), b->value.data(), out.data(), false);

    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->requires_grad = a->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->parents = {a, b};
        n->backward_fn = [m, k, n2](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            if (pa.requires_grad)
                gemm(false, true, m, k, n2, self.grad.data(), pb.value.data(),
                     pa.ensure_grad().data(), true);
            if (pb.requires_grad)
                gemm(true, false, k, n2, m, pa.value.data(), self.grad.data(),
                     pb.ensure_grad().data(), true);
        };
    }
    return n;
}

Tensor bmm(const Tensor& a, const Tensor& b) {
    require(a->value.ndim() == 3 && b->value.ndim() == 3, "bmm: inputs must be 3-d");
    const int B = a->value.dim(0), m = a->value.dim(1), k = a->value.dim(2), n2 = b->value.dim(2);
    require(b->value.dim(0) == B && b->value.dim(1) == k, "bmm: shape mismatch");
    NdArray out({B, m, n2});
    for (int i = 0; i < B; ++i)
        gemm(false, false, m, n2, k, &a->value[static_cast<int64_t>(i) * m * k],
             &b->value[static_cast<int64_t>(i) * k * n2], &out[static_cast<int64_t>(i) * m * n2], false);

    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->requires_grad = a->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->parents = {a, b};
        n->backward_fn = [B, m, k, n2](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            for (int i = 0; i < B; ++i) {
                const float* gy = &self.grad[static_cast<int64_t>(i) * m * n2];
                if (pa.requires_grad)
                    gemm(false, true, m, k, n2, gy, &pb.value[static_cast<int64_t>(i) * k * n2],
                         &pa.ensure_grad()[static_cast<int64_t>(i) * m * k], true);
                if (pb.requires_grad)
                    gemm(true, false, k, n2, m, &pa.value[static_cast<int64_t>(i) * m * k], gy,
                         &pb.ensure_grad()[static_cast<int64_t>(i) * k * n2], true);
            }
        };
    }
    return n;
}

Tensor softmax_lastdim(const Tensor& a) {
    const int d = a->value.shape.back();
    const int64_t rows = a->value.size() / d;
    NdArray out(a->value.shape);
    for (int64_t r = 0; r < rows; ++r) {
        const float* x = &a->value[r * d];
        float* y = &out[r * d];
        float mx = x[0];
        for (int j = 1; j < d; ++j) mx = std::max(mx, x[j]);
        float z = 0.0f;
        for (int j = 0; j < d; ++j) {
            y[j] = std::exp(x[j] - mx);
            z += y[j];
        }
        const float inv = 1.0f / z;
        for (int j = 0; j < d; ++j) y[j] *= inv;
    }
    return unary(a, std::move(out), [d, rows](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const float* p = &self.value[r * d];
            const float* gy = &self.grad[r * d];
            float dot = 0.0f;
            for (int j = 0; j < d; ++j) dot += gy[j] * p[j];
            for (int j = 0; j < d; ++j) g[r * d + j] += p[j] * (gy[j] - dot);
        }
    });
}

Tensor embedding(const Tensor& table, const std::vector<int>& ids) {
    require(table->value.ndim() == 2, "embedding: table must be [V, d]");
    const int V = table->value.dim(0), d = table->value.dim(1);
    const int n = static_cast<int>(ids.size());
    NdArray out({n, d});
    for (int i = 0; i < n; ++i) {
        require(ids[static_cast<size_t>(i)] >= 0 && ids[static_cast<size_t>(i)] < V, "embedding: id out of range");
        std::copy_n(&table->value[static_cast<int64_t>(ids[static_cast<size_t>(i)]) * d], d,
                    &out[static_cast<int64_t>(i) * d]);
    }
    return unary(table, std::move(out), [ids, d](Node& self, Node& pa) {
        auto& g = pa.ensure_grad();
        for (size_t i = 0; i < ids.size(); ++i)
            for (int j = 0; j < d; ++j)
                g[static_cast<int64_t>(ids[i]) * d + j] += self.grad[static_cast<int64_t>(i) * d + j];
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
    const int d = x->value.shape.back();
    require(gamma->value.size() == d && beta->value.size() == d, "layer_norm: affine dim mismatch");
    const int64_t rows = x->value.size() / d;
    NdArray out(x->value.shape);
    NdArray xhat(x->value.shape);
    std::vector<float> inv_std(static_cast<size_t>(rows));
    for (int64_t r = 0; r < rows; ++r) {
        const float* xi = &x->value[r * d];
        float mu = 0.0f;
        for (int j = 0; j < d; ++j) mu += xi[j];
        mu /= static_cast<float>(d);
        float var = 0.0f;
        for (int j = 0; j < d; ++j) var += (xi[j] - mu) * (xi[j] - mu);
        var /= static_cast<float>(d);
        const float is = 1.0f / std::sqrt(var + eps);
        inv_std[static_cast<size_t>(r)] = is;
        for (int j = 0; j < d; ++j) {
            xhat[r * d + j] = (xi[j] - mu) * is;
            out[r * d + j] = xhat[r * d + j] * gamma->value[j] + beta->value[j];
        }
    }
    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->requires_grad = x->requires_grad || gamma->requires_grad || beta->requires_grad;
    if (n->requires_grad) {
        n->parents = {x, gamma, beta};
        n->backward_fn = [d, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
            Node& px = *self.parents[0];
            Node& pg = *self.parents[1];
            Node& pb = *self.parents[2];
            if (pg.requires_grad) {
                auto& g = pg.ensure_grad();
                for (int64_t r = 0; r < rows; ++r)
                    for (int j = 0; j < d; ++j) g[j] += self.grad[r * d + j] * xhat[r * d + j];
            }
            if (pb.requires_grad) {
                auto& g = pb.ensure_grad();
                for (int64_t r = 0; r < rows; ++r)
                    for (int j = 0; j < d; ++j) g[j] += self.grad[r * d + j];
            }
            if (px.requires_grad) {
                auto& g = px.ensure_grad();
                for (int64_t r = 0; r < rows; ++r) {
                    float mean_dxhat = 0.0f, mean_dxhat_xhat = 0.0f;
                    for (int j = 0; j < d; ++j) {
                        const float dxh = self.grad[r * d + j] * pg.value[j];
                        mean_dxhat += dxh;
                        mean_dxhat_xhat += dxh * xhat[r * d + j];
                    }
                    mean_dxhat /= static_cast<float>(d);
                    mean_dxhat_xhat /= static_cast<float>(d);
                    for (int j = 0; j < d; ++j) {
                        const float dxh = self.grad[r * d + j] * pg.value[j];
                        g[r * d + j] += inv_std[static_cast<size_t>(r)] *
                                        (dxh - mean_dxhat - xhat[r * d + j] * mean_dxhat_xhat);
                    }
                }
            }
        };
    }
    return n;
}

Tensor group_norm(const Tensor& x, int groups, const Tensor& gamma, const Tensor& beta, float eps) {
    require(x->value.ndim() == 4, "group_norm: input must be [N,C,H,W]");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    require(C % groups == 0, "group_norm: channels not divisible by groups");
    require(gamma->value.size() == C && beta->value.size() == C, "group_norm: affine dim mismatch");
    const int cg = C / groups;
    const int64_t spatial = static_cast<int64_t>(H) * W;
    const int64_t gsize = cg * spatial;

    NdArray out(x->value.shape);
    NdArray xhat(x->value.shape);
    std::vector<float> inv_std(static_cast<size_t>(N) * groups);
    for (int nidx = 0; nidx < N; ++nidx) {
        for (int g = 0; g < groups; ++g) {
            const int64_t base = (static_cast<int64_t>(nidx) * C + static_cast<int64_t>(g) * cg) * spatial;
            double mu = 0.0;
            for (int64_t i = 0; i < gsize; ++i) mu += x->value[base + i];
            mu /= static_cast<double>(gsize);
            double var = 0.0;
            for (int64_t i = 0; i < gsize; ++i) {
                const double dd = x->value[base + i] - mu;
                var += dd * dd;
            }
            var /= static_cast<double>(gsize);
            const float is = static_cast<float>(1.0 / std::sqrt(var + eps));
            inv_std[static_cast<size_t>(nidx) * groups + g] = is;
            for (int c = 0; c < cg; ++c) {
                const float ga = gamma->value[g * cg + c];
                const float be = beta->value[g * cg + c];
                const int64_t cbase = base + static_cast<int64_t>(c) * spatial;
                for (int64_t i = 0; i < spatial; ++i) {
                    const float xh = (x->value[cbase + i] - static_cast<float>(mu)) * is;
                    xhat[cbase + i] = xh;
                    out[cbase + i] = xh * ga + be;
                }
            }
        }
    }
    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->requires_grad = x->requires_grad || gamma->requires_grad || beta->requires_grad;
    if (n->requires_grad) {
        n->parents = {x, gamma, beta};
        n->backward_fn = [N, C, groups, cg, spatial, gsize, xhat = std::move(xhat),
                          inv_std = std::move(inv_std)](Node& self) {
            Node& px = *self.parents[0];
            Node& pg = *self.parents[1];
            Node& pb = *self.parents[2];
            if (pg.requires_grad || pb.requires_grad) {
                auto& gg = pg.ensure_grad();
                auto& gb = pb.ensure_grad();
                for (int nidx = 0; nidx < N; ++nidx)
                    for (int c = 0; c < C; ++c) {
                        const int64_t base = (static_cast<int64_t>(nidx) * C + c) * spatial;
                        float sg = 0.0f, sb = 0.0f;
                        for (int64_t i = 0; i < spatial; ++i) {
                            sg += self.grad[base + i] * xhat[base + i];
                            sb += self.grad[base + i];
                        }
                        gg[c] += sg;
                        gb[c] += sb;
                    }
            }
            if (px.requires_grad) {
                auto& gx = px.ensure_grad();
                for (int nidx = 0; nidx < N; ++nidx)
                    for (int g = 0; g < groups; ++g) {
                        const int64_t base =
                            (static_cast<int64_t>(nidx) * C + static_cast<int64_t>(g) * cg) * spatial;
                        double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                        for (int c = 0; c < cg; ++c) {
                            const float ga = pg.value[g * cg + c];
                            const int64_t cbase = base + static_cast<int64_t>(c) * spatial;
                            for (int64_t i = 0; i < spatial; ++i) {
                                const double dxh = static_cast<double>(self.grad[cbase + i]) * ga;
                                mean_dxh += dxh;
                                mean_dxh_xh += dxh * xhat[cbase + i];
                            }
                        }
                        mean_dxh /= static_cast<double>(gsize);
                        mean_dxh_xh /= static_cast<double>(gsize);
                        const float is = inv_std[static_cast<size_t>(nidx) * groups + g];
                        for (int c = 0; c < cg; ++c) {
                            const float ga = pg.value[g * cg + c];
                            const int64_t cbase = base + static_cast<int64_t>(c) * spatial;
                            for (int64_t i = 0; i < spatial; ++i) {
                                const float dxh = self.grad[cbase + i] * ga;
                                gx[cbase + i] += is * (dxh - static_cast<float>(mean_dxh) -
                                                       xhat[cbase + i] * static_cast<float>(mean_dxh_xh));
                            }
                        }
                    }
            }
        };
    }
    return n;
}

}  // namespace condfoley::nn
