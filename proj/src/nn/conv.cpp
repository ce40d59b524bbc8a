// SPDX-License-Identifier: Apache-2.0
#include "condfoley/nn/conv.hpp"

#include <omp.h>

#include "condfoley/nn/ops.hpp"

namespace condfoley::nn {

namespace {

struct ConvDims {
    int N, C, H, W, O, kh, kw, sh, sw, ph, pw, Ho, Wo;
};

void im2col(const float* x, const ConvDims& d, float* cols) {
    // cols: [C*kh*kw, Ho*Wo]
    const int64_t hw = static_cast<int64_t>(d.Ho) * d.Wo;
    for (int c = 0; c < d.C; ++c)
        for (int ki = 0; ki < d.kh; ++ki)
            for (int kj = 0; kj < d.kw; ++kj) {
                float* row = cols + ((static_cast<int64_t>(c) * d.kh + ki) * d.kw + kj) * hw;
                for (int oy = 0; oy < d.Ho; ++oy) {
                    const int iy = oy * d.sh - d.ph + ki;
                    if (iy < 0 || iy >= d.H) {
                        for (int ox = 0; ox < d.Wo; ++ox) row[static_cast<int64_t>(oy) * d.Wo + ox] = 0.0f;
                        continue;
                    }
                    const float* src = x + (static_cast<int64_t>(c) * d.H + iy) * d.W;
                    for (int ox = 0; ox < d.Wo; ++ox) {
                        const int ix = ox * d.sw - d.pw + kj;
                        row[static_cast<int64_t>(oy) * d.Wo + ox] =
                            (ix >= 0 && ix < d.W) ? src[ix] : 0.0f;
                    }
                }
            }
}

void col2im_accum(const float* cols, const ConvDims& d, float* gx) {
    const int64_t hw = static_cast<int64_t>(d.Ho) * d.Wo;
    for (int c = 0; c < d.C; ++c)
        for (int ki = 0; ki < d.kh; ++ki)
            for (int kj = 0; kj < d.kw; ++kj) {
                const float* row = cols + ((static_cast<int64_t>(c) * d.kh + ki) * d.kw + kj) * hw;
                for (int oy = 0; oy < d.Ho; ++oy) {
                    const int iy = oy * d.sh - d.ph + ki;
                    if (iy < 0 || iy >= d.H) continue;
                    float* dst = gx + (static_cast<int64_t>(c) * d.H + iy) * d.W;
                    for (int ox = 0; ox < d.Wo; ++ox) {
                        const int ix = ox * d.sw - d.pw + kj;
                        if (ix >= 0 && ix < d.W) dst[ix] += row[static_cast<int64_t>(oy) * d.Wo + ox];
                    }
                }
            }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride_h, int stride_w,
              int pad_h, int pad_w) {
    require(x->value.ndim() == 4 && w->value.ndim() == 4, "conv2d: x [N,C,H,W], w [O,C,kh,kw]");
    ConvDims d;
    d.N = x->value.dim(0);
    d.C = x->value.dim(1);
    d.H = x->value.dim(2);
    d.W = x->value.dim(3);
    d.O = w->value.dim(0);
    d.kh = w->value.dim(2);
    d.kw = w->value.dim(3);
    d.sh = stride_h;
    d.sw = stride_w;
    d.ph = pad_h;
    d.pw = pad_w;
    require(w->value.dim(1) == d.C, "conv2d: channel mismatch");
    require(b->value.size() == d.O, "conv2d: bias size mismatch");
    d.Ho = (d.H + 2 * d.ph - d.kh) / d.sh + 1;
    d.Wo = (d.W + 2 * d.pw - d.kw) / d.sw + 1;
    require(d.Ho > 0 && d.Wo > 0, "conv2d: empty output");

    const int64_t ck = static_cast<int64_t>(d.C) * d.kh * d.kw;
    const int64_t hw = static_cast<int64_t>(d.Ho) * d.Wo;
    const int64_t in_sz = static_cast<int64_t>(d.C) * d.H * d.W;
    const int64_t out_sz = static_cast<int64_t>(d.O) * hw;

    NdArray out({d.N, d.O, d.Ho, d.Wo});
#pragma omp parallel
    {
        std::vector<float> cols(static_cast<size_t>(ck * hw));
#pragma omp for schedule(static)
        for (int n = 0; n < d.N; ++n) {
            im2col(&x->value[static_cast<int64_t>(n) * in_sz], d, cols.data());
            float* y = &out[static_cast<int64_t>(n) * out_sz];
            gemm(false, false, d.O, static_cast<int>(hw), static_cast<int>(ck), w->value.data(),
                 cols.data(), y, false);
            for (int o = 0; o < d.O; ++o) {
                const float bo = b->value[o];
                for (int64_t i = 0; i < hw; ++i) y[static_cast<int64_t>(o) * hw + i] += bo;
            }
        }
    }

    auto node = std::make_shared<Node>();
    node->value = std::move(out);
    node->requires_grad = x->requires_grad || w->requires_grad || b->requires_grad;
    if (node->requires_grad) {
        node->parents = {x, w, b};
        node->backward_fn = [d, ck, hw, in_sz, out_sz](Node& self) {
            Node& px = *self.parents[0];
            Node& pw = *self.parents[1];
            Node& pb = *self.parents[2];
            float* gx = px.requires_grad ? px.ensure_grad().data() : nullptr;
            float* gw = pw.requires_grad ? pw.ensure_grad().data() : nullptr;
            float* gb = pb.requires_grad ? pb.ensure_grad().data() : nullptr;

            const int nthreads = omp_get_max_threads();
            // per-thread weight/bias accumulators, reduced in thread order
            std::vector<NdArray> tgw(static_cast<size_t>(nthreads));
            std::vector<NdArray> tgb(static_cast<size_t>(nthreads));
#pragma omp parallel num_threads(nthreads)
            {
                const int tid = omp_get_thread_num();
                if (gw) tgw[static_cast<size_t>(tid)] = NdArray(pw.value.shape);
                if (gb) tgb[static_cast<size_t>(tid)] = NdArray({d.O});
                std::vector<float> cols(static_cast<size_t>(ck * hw));
                std::vector<float> dcols(static_cast<size_t>(ck * hw));
#pragma omp for schedule(static)
                for (int n = 0; n < d.N; ++n) {
                    const float* gy = &self.grad[static_cast<int64_t>(n) * out_sz];
                    if (gw) {
                        im2col(&px.value[static_cast<int64_t>(n) * in_sz], d, cols.data());
                        gemm(false, true, d.O, static_cast<int>(ck), static_cast<int>(hw), gy,
                             cols.data(), tgw[static_cast<size_t>(tid)].data(), true);
                    }
                    if (gb)
                        for (int o = 0; o < d.O; ++o) {
                            float acc = 0.0f;
                            for (int64_t i = 0; i < hw; ++i) acc += gy[static_cast<int64_t>(o) * hw + i];
                            tgb[static_cast<size_t>(tid)][o] += acc;
                        }
                    if (gx) {
                        gemm(true, false, static_cast<int>(ck), static_cast<int>(hw), d.O,
                             pw.value.data(), gy, dcols.data(), false);
                        col2im_accum(dcols.data(), d, gx + static_cast<int64_t>(n) * in_sz);
                    }
                }
            }
            for (int t = 0; t < nthreads; ++t) {
                if (gw && tgw[static_cast<size_t>(t)].size() > 0)
                    for (int64_t i = 0; i < pw.value.size(); ++i) gw[i] += tgw[static_cast<size_t>(t)][i];
                if (gb && tgb[static_cast<size_t>(t)].size() > 0)
                    for (int o = 0; o < d.O; ++o) gb[o] += tgb[static_cast<size_t>(t)][o];
            }
        };
    }
    return node;
}

Tensor upsample2x(const Tensor& x) {
    require(x->value.ndim() == 4, "upsample2x: input must be [N,C,H,W]");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    NdArray out({N, C, 2 * H, 2 * W});
    for (int64_t nc = 0; nc < static_cast<int64_t>(N) * C; ++nc) {
        const float* src = &x->value[nc * H * W];
        float* dst = &out[nc * 4 * H * W];
        for (int y = 0; y < H; ++y)
            for (int xx = 0; xx < W; ++xx) {
                const float v = src[static_cast<int64_t>(y) * W + xx];
                float* o = dst + (static_cast<int64_t>(2 * y) * 2 * W + 2 * xx);
                o[0] = v;
                o[1] = v;
                o[2 * W] = v;
                o[2 * W + 1] = v;
            }
    }
    auto node = std::make_shared<Node>();
    node->value = std::move(out);
    node->requires_grad = x->requires_grad;
    if (node->requires_grad) {
        node->parents = {x};
        node->backward_fn = [N, C, H, W](Node& self) {
            auto& g = self.parents[0]->ensure_grad();
            for (int64_t nc = 0; nc < static_cast<int64_t>(N) * C; ++nc) {
                float* dst = &g[nc * H * W];
                const float* src = &self.grad[nc * 4 * H * W];
                for (int y = 0; y < H; ++y)
                    for (int xx = 0; xx < W; ++xx) {
                        const float* s = src + (static_cast<int64_t>(2 * y) * 2 * W + 2 * xx);
                        dst[static_cast<int64_t>(y) * W + xx] += s[0] + s[1] + s[2 * W] + s[2 * W + 1];
                    }
            }
        };
    }
    return node;
}

Tensor avg_pool2d(const Tensor& x, int k) {
    require(x->value.ndim() == 4, "avg_pool2d: input must be [N,C,H,W]");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    require(H % k == 0 && W % k == 0, "avg_pool2d: dims not divisible by kernel");
    const int Ho = H / k, Wo = W / k;
    const float inv = 1.0f / static_cast<float>(k * k);
    NdArray out({N, C, Ho, Wo});
    for (int64_t nc = 0; nc < static_cast<int64_t>(N) * C; ++nc) {
        const float* src = &x->value[nc * H * W];
        float* dst = &out[nc * Ho * Wo];
        for (int y = 0; y < Ho; ++y)
            for (int xx = 0; xx < Wo; ++xx) {
                float acc = 0.0f;
                for (int dy = 0; dy < k; ++dy)
                    for (int dx = 0; dx < k; ++dx)
                        acc += src[static_cast<int64_t>(y * k + dy) * W + xx * k + dx];
                dst[static_cast<int64_t>(y) * Wo + xx] = acc * inv;
            }
    }
    auto node = std::make_shared<Node>();
    node->value = std::move(out);
    node->requires_grad = x->requires_grad;
    if (node->requires_grad) {
        node->parents = {x};
        node->backward_fn = [N, C, H, W, Ho, Wo, k, inv](Node& self) {
            auto& g = self.parents[0]->ensure_grad();
            for (int64_t nc = 0; nc < static_cast<int64_t>(N) * C; ++nc) {
                float* dst = &g[nc * H * W];
                const float* src = &self.grad[nc * Ho * Wo];
                for (int y = 0; y < Ho; ++y)
                    for (int xx = 0; xx < Wo; ++xx) {
                        const float gv = src[static_cast<int64_t>(y) * Wo + xx] * inv;
                        for (int dy = 0; dy < k; ++dy)
                            for (int dx = 0; dx < k; ++dx)
                                dst[static_cast<int64_t>(y * k + dy) * W + xx * k + dx] += gv;
                    }
            }
        };
    }
    return node;
}

Tensor mean_spatial(const Tensor& x) {
    require(x->value.ndim() == 4, "mean_spatial: input must be [N,C,H,W]");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    const int64_t hw = static_cast<int64_t>(H) * W;
    const float inv = 1.0f / static_cast<float>(hw);
    NdArray out({N, C});
    for (int64_t nc = 0; nc < static_cast<int64_t>(N) * C; ++nc) {
        const float* src = &x->value[nc * hw];
        float acc = 0.0f;
        for (int64_t i = 0; i < hw; ++i) acc += src[i];
        out[nc] = acc * inv;
    }
    auto node = std::make_shared<Node>();
    node->value = std::move(out);
    node->requires_grad = x->requires_grad;
    if (node->requires_grad) {
        node->parents = {x};
        node->backward_fn = [N, C, hw, inv](Node& self) {
            auto& g = self.parents[0]->ensure_grad();
            for (int64_t nc = 0; nc < static_cast<int64_t>(N) * C; ++nc) {
                const float gv = self.grad[nc] * inv;
                float* dst = &g[nc * hw];
                for (int64_t i = 0; i < hw; ++i) dst[i] += gv;
            }
        };
    }
    return node;
}

}  // namespace condfoley::nn
