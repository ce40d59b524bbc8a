// SPDX-License-Identifier: Apache-2.0
#include "condfoley/codec/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "condfoley/nn/adam.hpp"

namespace condfoley::codec {

using nn::Tensor;

float reconstruction_l1_log(const CodecModel& model, const std::vector<dsp::MelSpectrogram>& clips,
                            int max_clips) {
    const int n = max_clips > 0 ? std::min<int>(max_clips, static_cast<int>(clips.size()))
                                : static_cast<int>(clips.size());
    require(n > 0, "reconstruction_l1_log: no clips");
    double acc = 0.0;
    int64_t cells = 0;
    for (int i = 0; i < n; ++i) {
        const auto codes = model.codes_from_spectrogram(clips[static_cast<size_t>(i)]);
        const auto rec = model.spectrogram_from_codes(codes);
        for (size_t j = 0; j < rec.values.size(); ++j)
            acc += std::abs(static_cast<double>(rec.values[j]) - clips[static_cast<size_t>(i)].values[j]);
        cells += static_cast<int64_t>(rec.values.size());
    }
    return static_cast<float>(acc / static_cast<double>(cells));
}

CodecTrainResult train_codec(CodecModel& model, const std::vector<dsp::MelSpectrogram>& clips,
                             const CodecTrainConfig& tc, const FeatureExtractor* perceptual) {
    require(!clips.empty(), "train_codec: empty dataset");
    require(tc.epochs >= 1 && tc.batch_size >= 1, "train_codec: bad schedule");

    Rng rng(tc.seed);
    nn::Adam opt(model.params().all(), tc.lr);
    nn::Adam opt_d(model.disc_params().all(), tc.disc_lr);

    const int n = static_cast<int>(clips.size());
    const int steps_per_epoch = (n + tc.batch_size - 1) / tc.batch_size;
    const int64_t total_steps = static_cast<int64_t>(steps_per_epoch) * tc.epochs;
    const int64_t adv_start = static_cast<int64_t>(tc.adv_start_frac * static_cast<double>(total_steps));

    CodecTrainResult result;
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

    std::vector<char> code_used(static_cast<size_t>(model.config().codebook_size), 0);
    nn::NdArray reservoir;  // last batch of encoder rows, feeds dead-code reseeding

    float initial_loss = -1.0f;
    int divergent_streak = 0;
    int64_t step = 0;

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        // deterministic shuffle
        for (int i = n - 1; i > 0; --i) std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(rng.uniform_int(0, i))]);
        std::fill(code_used.begin(), code_used.end(), 0);

        for (int s = 0; s < steps_per_epoch; ++s, ++step) {
            const float lr_min = tc.lr * tc.lr_min_frac;
            opt.set_lr(lr_min + 0.5f * (tc.lr - lr_min) *
                                    (1.0f + std::cos(M_PI * static_cast<double>(step) /
                                                     static_cast<double>(total_steps))));
            std::vector<const dsp::MelSpectrogram*> batch;
            for (int b = 0; b < tc.batch_size; ++b)
                batch.push_back(&clips[static_cast<size_t>(order[static_cast<size_t>((s * tc.batch_size + b) % n)])]);
            const int N = static_cast<int>(batch.size());

            auto x = nn::constant(model.normalize_batch(batch));
            auto z_hat = model.encode_rows(x);
            const auto ids = nearest_codes(z_hat->value, model.codebook()->value);
            for (int id : ids) code_used[static_cast<size_t>(id)] = 1;
            reservoir = z_hat->value;

            auto z_q = nn::embedding(model.codebook(), ids);
            // straight-through: value is the quantized row, gradient passes to the encoder
            auto z_st = nn::straight_through(z_hat, z_q);
            auto s_hat = model.decode_rows(z_st, N);

            const bool adv_on = tc.loss.discriminator_weight > 0.0f && step >= adv_start;
            std::vector<std::pair<Tensor, Tensor>> dlogits;
            if (adv_on) {
                auto real = model.discriminate(x);
                auto fake = model.discriminate(s_hat);
                for (size_t i = 0; i < real.size(); ++i) dlogits.emplace_back(real[i], fake[i]);
            }
            std::vector<std::pair<Tensor, Tensor>> feats;
            if (perceptual && tc.loss.perceptual_weight > 0.0f) {
                auto fr = (*perceptual)(x);
                auto ff = (*perceptual)(s_hat);
                for (size_t i = 0; i < fr.size(); ++i) feats.emplace_back(nn::detach(fr[i]), ff[i]);
            }

            auto loss = codec_loss(x, s_hat, z_hat, z_q, feats, dlogits, tc.loss);
            const float total = loss.total->value[0];
            result.loss_trace.push_back(total);

            if (initial_loss < 0.0f) initial_loss = std::max(total, 1e-6f);
            divergent_streak = total > 10.0f * initial_loss ? divergent_streak + 1 : 0;
            if (divergent_streak >= 50)
                throw std::runtime_error("train_codec: divergence (loss > 10x initial for 50 steps)");

            // autoencoder update; log D(S) is constant w.r.t. these params
            opt.zero_grad();
            opt_d.zero_grad();
            nn::backward(loss.total);
            opt.clip_grad_norm(tc.grad_clip);
            opt.step();

            if (adv_on) {
                // discriminator ascends the adversarial component
                opt_d.zero_grad();
                auto real = model.discriminate(x);
                auto fake = model.discriminate(nn::constant(s_hat->value));
                Tensor d_loss;
                for (size_t i = 0; i < real.size(); ++i) {
                    auto term = nn::add(nn::mean_all(nn::log_sigmoid(real[i])),
                                        nn::mean_all(nn::log_sigmoid(nn::scale(fake[i], -1.0f))));
                    d_loss = d_loss ? nn::add(d_loss, term) : term;
                }
                d_loss = nn::scale(d_loss, -1.0f / static_cast<float>(real.size()));
                nn::backward(d_loss);
                opt_d.clip_grad_norm(tc.grad_clip);
                opt_d.step();
            }
        }

        // re-seed codes unused for a full epoch from fresh encoder outputs
        if (reservoir.size() > 0) {
            auto& cb = model.codebook()->value;
            const int d = model.config().embed_dim;
            const int rows = static_cast<int>(reservoir.size()) / d;
            for (int k = 0; k < model.config().codebook_size; ++k) {
                if (code_used[static_cast<size_t>(k)]) continue;
                const int src = rng.uniform_int(0, rows - 1);
                std::copy_n(&reservoir[static_cast<int64_t>(src) * d], d, &cb[static_cast<int64_t>(k) * d]);
            }
        }

        result.epochs_run = epoch + 1;
        const bool last = epoch + 1 == tc.epochs;
        if (tc.target_l1 > 0.0f && (last || (epoch + 1) % tc.eval_every == 0)) {
            result.final_l1_log = reconstruction_l1_log(model, clips, tc.eval_max_clips);
            if (tc.verbose)
                std::fprintf(stderr, "[codec] epoch %d loss %.4f l1_log %.4f\n", epoch + 1,
                             result.loss_trace.back(), result.final_l1_log);
            if (result.final_l1_log < tc.target_l1) break;
        } else if (tc.verbose && (epoch + 1) % tc.eval_every == 0) {
            std::fprintf(stderr, "[codec] epoch %d loss %.4f\n", epoch + 1, result.loss_trace.back());
        }
    }
    if (result.final_l1_log < 0.0f)
        result.final_l1_log = reconstruction_l1_log(model, clips, tc.eval_max_clips);
    return result;
}

}  // namespace condfoley::codec
