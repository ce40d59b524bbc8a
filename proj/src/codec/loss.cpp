// SPDX-License-Identifier: Apache-2.0
#include "condfoley/codec/loss.hpp"

#include <cmath>

namespace condfoley::codec {

using nn::Tensor;

CodecLossResult codec_loss(const Tensor& S, const Tensor& S_hat, const Tensor& z_hat_rows,
                           const Tensor& z_rows,
                           const std::vector<std::pair<Tensor, Tensor>>& features,
                           const std::vector<std::pair<Tensor, Tensor>>& disc_logits,
                           const CodecLossConfig& cfg) {
    require(S->value.same_shape(S_hat->value), "codec_loss: spectrogram shape mismatch");
    require(z_hat_rows->value.same_shape(z_rows->value), "codec_loss: latent shape mismatch");

    CodecLossResult r;
    auto track = [&](const char* name, const Tensor& term) {
        const float v = term->value[0];
        if (!std::isfinite(v))
            throw std::runtime_error(std::string("codec_loss: non-finite component ") + name);
        r.components[name] = v;
        r.total = r.total ? nn::add(r.total, term) : term;
    };

    track("reconstruction", nn::mse(S, S_hat));
    track("codebook_commit",
          nn::scale(nn::mse(z_hat_rows, nn::detach(z_rows)), cfg.codebook_commit_weight));
    track("codebook_embed", nn::mse(nn::detach(z_hat_rows), z_rows));

    if (cfg.perceptual_weight > 0.0f && !features.empty()) {
        require(static_cast<int>(features.size()) >= cfg.perceptual_layers,
                "codec_loss: feature extractor exposes fewer layers than configured");
        Tensor perc;
        for (int i = 0; i < cfg.perceptual_layers; ++i) {
            const auto& [fr, ff] = features[static_cast<size_t>(i)];
            require(fr->value.same_shape(ff->value), "codec_loss: feature shape mismatch");
            // 1/(F_i * T_i) * ||S_i - S_hat_i||^2, per sample
            const auto& sh = fr->value.shape;
            const float spatial = static_cast<float>(sh[sh.size() - 1]) * sh[sh.size() - 2];
            const float n_batch = static_cast<float>(sh[0]);
            auto term = nn::scale(nn::sum_all(nn::square(nn::sub(fr, ff))),
                                  1.0f / (spatial * n_batch));
            perc = perc ? nn::add(perc, term) : term;
        }
        track("perceptual", nn::scale(perc, cfg.perceptual_weight));
    }

    if (cfg.discriminator_weight > 0.0f && !disc_logits.empty()) {
        Tensor adv;
        for (const auto& [real, fake] : disc_logits) {
            // log D(S) + log(1 - D(S_hat)) with D = sigmoid over patch logits
            auto term = nn::add(nn::mean_all(nn::log_sigmoid(real)),
                                nn::mean_all(nn::log_sigmoid(nn::scale(fake, -1.0f))));
            adv = adv ? nn::add(adv, term) : term;
        }
        track("adversarial",
              nn::scale(adv, cfg.discriminator_weight / static_cast<float>(disc_logits.size())));
    }
    return r;
}

}  // namespace condfoley::codec
