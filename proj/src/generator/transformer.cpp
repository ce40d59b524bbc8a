// SPDX-License-Identifier: Apache-2.0
#include "condfoley/generator/transformer.hpp"

#include <cmath>

namespace condfoley::generator {

Transformer::Transformer(nn::ParamStore& ps, const std::string& prefix, const GeneratorConfig& cfg,
                         Rng& rng)
    : cfg_(cfg) {
    require(cfg_.model_width % cfg_.heads == 0, "transformer: width not divisible by heads");
    for (int l = 0; l < cfg_.layers; ++l) {
        const std::string p = prefix + ".b" + std::to_string(l);
        Block b;
        b.ln1 = nn::LayerNormLayer::create(ps, p + ".ln1", cfg_.model_width);
        b.wq = nn::Linear::create(ps, p + ".wq", cfg_.model_width, cfg_.model_width, rng, 0.02f);
        b.wk = nn::Linear::create(ps, p + ".wk", cfg_.model_width, cfg_.model_width, rng, 0.02f);
        b.wv = nn::Linear::create(ps, p + ".wv", cfg_.model_width, cfg_.model_width, rng, 0.02f);
        b.wo = nn::Linear::create(ps, p + ".wo", cfg_.model_width, cfg_.model_width, rng, 0.02f);
        b.ln2 = nn::LayerNormLayer::create(ps, p + ".ln2", cfg_.model_width);
        b.fc1 = nn::Linear::create(ps, p + ".fc1", cfg_.model_width,
                                   cfg_.model_width * cfg_.mlp_mult, rng, 0.02f);
        b.fc2 = nn::Linear::create(ps, p + ".fc2", cfg_.model_width * cfg_.mlp_mult,
                                   cfg_.model_width, rng, 0.02f);
        blocks_.push_back(std::move(b));
    }
    ln_f_ = nn::LayerNormLayer::create(ps, prefix + ".ln_f", cfg_.model_width);
    head_ = nn::Linear::create(ps, prefix + ".head", cfg_.model_width, cfg_.vocab_size, rng, 0.02f);
}

nn::Tensor Transformer::forward_out_logits(const nn::Tensor& emb, int prefix_len) const {
    const int n = emb->value.dim(0);
    const int w = cfg_.model_width;
    const int heads = cfg_.heads;
    const int dh = w / heads;
    require(emb->value.dim(1) == w, "transformer: embedding width mismatch");
    require(n <= cfg_.context_length, "transformer: sequence exceeds context length");
    require(prefix_len > 0 && prefix_len < n, "transformer: bad prefix length");

    // additive mask, shared by all layers: prefix attends prefix, OUT rows
    // attend prefix and earlier-or-equal OUT rows
    nn::NdArray mask({heads, n, n}, -1e9f);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const bool ok = i < prefix_len ? (j < prefix_len) : (j < prefix_len || j <= i);
            if (ok)
                for (int h = 0; h < heads; ++h) mask.v[(static_cast<size_t>(h) * n + i) * n + j] = 0.0f;
        }
    auto mask_t = nn::constant(std::move(mask));
    const float scl = 1.0f / std::sqrt(static_cast<float>(dh));

    nn::Tensor x = emb;
    for (const auto& b : blocks_) {
        auto h = b.ln1(x);
        auto q = permute(reshape(b.wq(h), {n, heads, dh}), {1, 0, 2});
        auto k = permute(reshape(b.wk(h), {n, heads, dh}), {1, 0, 2});
        auto v = permute(reshape(b.wv(h), {n, heads, dh}), {1, 0, 2});
        auto scores = add(scale(bmm(q, permute(k, {0, 2, 1})), scl), mask_t);
        auto ctx = bmm(softmax_lastdim(scores), v);                  // [h, n, dh]
        auto merged = reshape(permute(ctx, {1, 0, 2}), {n, w});
        x = add(x, b.wo(merged));
        auto m = b.fc2(gelu(b.fc1(b.ln2(x))));
        x = add(x, m);
    }
    auto out_rows = slice_rows(ln_f_(x), prefix_len, n - prefix_len);
    return head_(out_rows);
}

InferenceSession::InferenceSession(const Transformer& tf) : tf_(&tf) {
    const auto& cfg = tf.config();
    for (int l = 0; l < cfg.layers; ++l) {
        kcache_.emplace_back(std::vector<int>{cfg.context_length, cfg.model_width});
        vcache_.emplace_back(std::vector<int>{cfg.context_length, cfg.model_width});
    }
}

namespace {

void layer_norm_rows(const float* x, int rows, int w, const nn::NdArray& gamma,
                     const nn::NdArray& beta, float* out) {
    for (int r = 0; r < rows; ++r) {
        const float* xi = x + static_cast<int64_t>(r) * w;
        float mu = 0.0f;
        for (int j = 0; j < w; ++j) mu += xi[j];
        mu /= static_cast<float>(w);
        float var = 0.0f;
        for (int j = 0; j < w; ++j) var += (xi[j] - mu) * (xi[j] - mu);
        var /= static_cast<float>(w);
        const float inv = 1.0f / std::sqrt(var + 1e-5f);
        float* yo = out + static_cast<int64_t>(r) * w;
        for (int j = 0; j < w; ++j) yo[j] = (xi[j] - mu) * inv * gamma[j] + beta[j];
    }
}

// rows x in, linear [in,out] + bias
void linear_rows(const float* x, int rows, const nn::Linear& lin, float* out) {
    const int in = lin.w->value.dim(0), d_out = lin.w->value.dim(1);
    nn::gemm(false, false, rows, d_out, in, x, lin.w->value.data(), out, false);
    for (int r = 0; r < rows; ++r)
        for (int j = 0; j < d_out; ++j) out[static_cast<int64_t>(r) * d_out + j] += lin.b->value[j];
}

}  // namespace

void InferenceSession::append(const nn::NdArray& rows) {
    const auto& cfg = tf_->config();
    const int w = cfg.model_width;
    const int heads = cfg.heads;
    const int dh = w / heads;
    const int R = rows.dim(0);
    require(rows.dim(1) == w, "inference: embedding width mismatch");
    require(n_cached_ + R <= cfg.context_length, "inference: context overflow");
    const bool prefix_block = n_cached_ == 0;

    nn::NdArray x = rows;  // [R, w], updated in place per layer
    std::vector<float> h(static_cast<size_t>(R) * w), q(static_cast<size_t>(R) * w);
    std::vector<float> mlp_h;
    const float scl = 1.0f / std::sqrt(static_cast<float>(dh));

    for (size_t l = 0; l < static_cast<size_t>(cfg.layers); ++l) {
        auto& kc = kcache_[l];
        auto& vc = vcache_[l];
        const auto& b = tf_->blocks()[l];
        layer_norm_rows(x.data(), R, w, b.ln1.gamma->value, b.ln1.beta->value, h.data());
        linear_rows(h.data(), R, b.wq, q.data());
        // new k/v rows go straight into the cache
        linear_rows(h.data(), R, b.wk, &kc[static_cast<int64_t>(n_cached_) * w]);
        linear_rows(h.data(), R, b.wv, &vc[static_cast<int64_t>(n_cached_) * w]);

        std::vector<float> ctx(static_cast<size_t>(R) * w);
        std::vector<float> scores;
        for (int r = 0; r < R; ++r) {
            // a prefix block attends all of itself; later rows attend the cache
            const int span = prefix_block ? R : n_cached_ + r + 1;
            scores.resize(static_cast<size_t>(span));
            for (int hd = 0; hd < heads; ++hd) {
                const float* qr = &q[static_cast<size_t>(r) * w + static_cast<size_t>(hd) * dh];
                float mx = -1e30f;
                for (int j = 0; j < span; ++j) {
                    const float* kj = &kc[static_cast<int64_t>(j) * w + hd * dh];
                    float acc = 0.0f;
                    for (int d = 0; d < dh; ++d) acc += qr[d] * kj[d];
                    acc *= scl;
                    scores[static_cast<size_t>(j)] = acc;
                    mx = std::max(mx, acc);
                }
                double z = 0.0;
                for (int j = 0; j < span; ++j) {
                    scores[static_cast<size_t>(j)] = std::exp(scores[static_cast<size_t>(j)] - mx);
                    z += scores[static_cast<size_t>(j)];
                }
                const float inv = static_cast<float>(1.0 / z);
                float* co = &ctx[static_cast<size_t>(r) * w + static_cast<size_t>(hd) * dh];
                std::fill_n(co, dh, 0.0f);
                for (int j = 0; j < span; ++j) {
                    const float p = scores[static_cast<size_t>(j)] * inv;
                    const float* vj = &vc[static_cast<int64_t>(j) * w + hd * dh];
                    for (int d = 0; d < dh; ++d) co[d] += p * vj[d];
                }
            }
        }
        std::vector<float> attn_out(static_cast<size_t>(R) * w);
        linear_rows(ctx.data(), R, b.wo, attn_out.data());
        for (int64_t i = 0; i < static_cast<int64_t>(R) * w; ++i) x[i] += attn_out[static_cast<size_t>(i)];

        layer_norm_rows(x.data(), R, w, b.ln2.gamma->value, b.ln2.beta->value, h.data());
        const int hidden = w * cfg.mlp_mult;
        mlp_h.resize(static_cast<size_t>(R) * hidden);
        linear_rows(h.data(), R, b.fc1, mlp_h.data());
        for (auto& u : mlp_h) {
            const float c = 0.7978845608028654f;
            const float t = std::tanh(c * (u + 0.044715f * u * u * u));
            u = 0.5f * u * (1.0f + t);
        }
        linear_rows(mlp_h.data(), R, b.fc2, attn_out.data());
        for (int64_t i = 0; i < static_cast<int64_t>(R) * w; ++i) x[i] += attn_out[static_cast<size_t>(i)];
    }
    n_cached_ += R;

    // logits of the final appended row
    std::vector<float> last_ln(static_cast<size_t>(w));
    layer_norm_rows(&x[static_cast<int64_t>(R - 1) * w], 1, w, tf_->final_ln().gamma->value,
                    tf_->final_ln().beta->value, last_ln.data());
    logits_.assign(static_cast<size_t>(cfg.vocab_size), 0.0f);
    linear_rows(last_ln.data(), 1, tf_->head(), logits_.data());
}

}  // namespace condfoley::generator
