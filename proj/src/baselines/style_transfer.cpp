// SPDX-License-Identifier: Apache-2.0
#include "condfoley/baselines/style_transfer.hpp"

#include "condfoley/dsp/mel.hpp"
#include "condfoley/nn/adam.hpp"
#include "condfoley/nn/conv.hpp"

namespace condfoley::baselines {

namespace {

// three fixed random 1-D conv layers over time, mel bands as channels
struct FeatureStack {
    std::vector<nn::Tensor> weights;  // [O, C, 1, k] constants
    std::vector<nn::Tensor> biases;

    explicit FeatureStack(int mels, uint64_t seed) {
        Rng rng(seed);
        const int chans[4] = {mels, 48, 48, 48};
        for (int l = 0; l < 3; ++l) {
            const float std = std::sqrt(2.0f / static_cast<float>(chans[l] * 5));
            weights.push_back(nn::constant(nn::NdArray::randn({chans[l + 1], chans[l], 1, 5}, rng, std)));
            biases.push_back(nn::constant(nn::NdArray({chans[l + 1]})));
        }
    }

    // x [1, mels, 1, T] -> per-layer maps
    std::vector<nn::Tensor> operator()(const nn::Tensor& x) const {
        std::vector<nn::Tensor> maps;
        nn::Tensor h = x;
        for (size_t l = 0; l < weights.size(); ++l) {
            h = relu(nn::conv2d(h, weights[l], biases[l], 1, 1, 0, 2));
            maps.push_back(h);
        }
        return maps;
    }
};

// Gram matrix of a [1, C, 1, T] map: F F^T / (C T)
nn::Tensor gram(const nn::Tensor& map) {
    const int C = map->value.dim(1);
    const int T = map->value.dim(3);
    auto f = reshape(map, {C, T});
    return scale(matmul(f, permute(f, {1, 0})), 1.0f / static_cast<float>(C * T));
}

}  // namespace

StyleTransferResult style_transfer_generate(const dsp::Waveform& content,
                                            const dsp::Waveform& style,
                                            const StyleTransferParams& params) {
    dsp::MelConfig mel_cfg;
    const auto content_mel = dsp::compute_mel_spectrogram(content, mel_cfg);
    const auto style_mel = dsp::compute_mel_spectrogram(style, mel_cfg);
    require(content_mel.num_frames == style_mel.num_frames,
            "style_transfer: inputs must share duration");
    const int T = content_mel.num_frames;
    const int M = content_mel.num_mels;

    auto to_input = [&](const dsp::MelSpectrogram& m) {
        nn::NdArray x({1, M, 1, T});  // bands as channels
        for (int t = 0; t < T; ++t)
            for (int f = 0; f < M; ++f) x[static_cast<int64_t>(f) * T + t] = m.at(t, f) * 0.1f;
        return x;
    };

    FeatureStack features(M, params.feature_seed);
    auto content_x = nn::constant(to_input(content_mel));
    auto style_maps = features(nn::constant(to_input(style_mel)));
    std::vector<nn::Tensor> style_grams;
    for (const auto& map : style_maps) style_grams.push_back(nn::constant(gram(map)->value));

    auto x = nn::param(to_input(content_mel));  // optimize the spectrogram itself
    nn::Adam opt({x}, params.lr);

    StyleTransferResult result;
    float best_loss = -1.0f;
    nn::NdArray best_x = x->value;
    for (int it = 0; it < params.iters; ++it) {
        opt.zero_grad();
        auto content_term = scale(nn::mse(x, content_x), params.content_weight);
        auto maps = features(x);
        nn::Tensor style_term;
        for (size_t l = 0; l < maps.size(); ++l) {
            auto term = nn::mse(gram(maps[l]), style_grams[l]);
            style_term = style_term ? nn::add(style_term, term) : term;
        }
        auto loss = nn::add(content_term, scale(style_term, params.style_weight));
        const float v = loss->value[0];
        if (best_loss < 0.0f || v < best_loss) {
            best_loss = v;
            best_x = x->value;
        }
        result.best_loss_trace.push_back(best_loss);
        nn::backward(loss);
        opt.step();
    }
    result.converged = result.best_loss_trace.back() < result.best_loss_trace.front() ||
                       result.best_loss_trace.size() <= 1;

    dsp::MelSpectrogram out_mel = content_mel;
    for (int t = 0; t < T; ++t)
        for (int f = 0; f < M; ++f) out_mel.at(t, f) = best_x[static_cast<int64_t>(f) * T + t] * 10.0f;
    result.waveform = dsp::griffin_lim_invert(out_mel, params.griffin_lim_iters, params.nnls_iters);
    return result;
}

}  // namespace condfoley::baselines
