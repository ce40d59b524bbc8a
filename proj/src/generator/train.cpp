// SPDX-License-Identifier: Apache-2.0
#include "condfoley/generator/train.hpp"

#include <cstdio>

#include "condfoley/dsp/augment.hpp"

namespace condfoley::generator {

using conditioning::BuildOptions;
using conditioning::build_sequence;

float train_generator_step(GeneratorModel& model, const codec::CodecModel& codec,
                           const std::vector<const data::ClipPair*>& batch, nn::Adam& opt,
                           const GenTrainConfig& tc, Rng& rng) {
    require(!batch.empty(), "train_generator_step: empty batch");
    opt.zero_grad();

    nn::Tensor total;
    for (const auto* pair : batch) {
        const auto target_mel = dsp::compute_mel_spectrogram(pair->input_audio, model.mel_cfg);
        const auto targets = codec.codes_from_spectrogram(target_mel);

        BuildOptions opts;
        opts.drop_conditioning = tc.cond_dropout > 0.0 && rng.bernoulli(tc.cond_dropout);
        dsp::MelSpectrogram cond_mel = dsp::compute_mel_spectrogram(pair->cond_audio, model.mel_cfg);
        if (tc.augment) cond_mel = dsp::spec_augment(cond_mel, rng, tc.aug_freq_mask, tc.aug_time_mask);
        opts.cond_mel = &cond_mel;

        auto seq = build_sequence(*pair, targets, model.cond, codec, model.mel_cfg, opts);
        auto logits = model.tf.forward_out_logits(seq.embeddings, seq.prefix_len);
        auto loss = cross_entropy_mean(logits, seq.target_codes);
        total = total ? nn::add(total, loss) : loss;
    }
    total = nn::scale(total, 1.0f / static_cast<float>(batch.size()));
    const float loss_value = total->value[0];
    if (!std::isfinite(loss_value)) throw std::runtime_error("train_generator: NaN loss");

    nn::backward(total);
    opt.clip_grad_norm(tc.grad_clip);
    opt.step();
    return loss_value;
}

float teacher_forced_accuracy(const GeneratorModel& model, const codec::CodecModel& codec,
                              const std::vector<data::ClipPair>& pairs) {
    require(!pairs.empty(), "teacher_forced_accuracy: no pairs");
    int64_t correct = 0, total = 0;
    for (const auto& pair : pairs) {
        const auto target_mel = dsp::compute_mel_spectrogram(pair.input_audio, model.mel_cfg);
        const auto targets = codec.codes_from_spectrogram(target_mel);
        auto seq = build_sequence(pair, targets, model.cond, codec, model.mel_cfg, {});
        auto logits = model.tf.forward_out_logits(seq.embeddings, seq.prefix_len);
        const int K = logits->value.dim(1);
        for (int i = 0; i < logits->value.dim(0); ++i) {
            int argmax = 0;
            for (int k = 1; k < K; ++k)
                if (logits->value.at(i, k) > logits->value.at(i, argmax)) argmax = k;
            correct += argmax == seq.target_codes[static_cast<size_t>(i)];
            ++total;
        }
    }
    return static_cast<float>(correct) / static_cast<float>(total);
}

namespace {

GenTrainResult train_loop(GeneratorModel& model, const codec::CodecModel& codec,
                          const GenTrainConfig& tc,
                          const std::function<std::vector<const data::ClipPair*>(Rng&)>& next_batch,
                          const std::vector<data::ClipPair>* eval_pairs) {
    nn::Adam opt(model.params.all(), tc.lr);
    Rng rng(tc.seed);
    GenTrainResult result;
    for (int step = 0; step < tc.steps; ++step) {
        auto batch = next_batch(rng);
        result.loss_trace.push_back(train_generator_step(model, codec, batch, opt, tc, rng));
        result.steps_run = step + 1;
        const bool last = step + 1 == tc.steps;
        if (eval_pairs && tc.target_accuracy > 0.0 && ((step + 1) % tc.eval_every == 0 || last)) {
            result.final_accuracy = teacher_forced_accuracy(model, codec, *eval_pairs);
            if (tc.verbose)
                std::fprintf(stderr, "[gen] step %d loss %.4f acc %.4f\n", step + 1,
                             result.loss_trace.back(), result.final_accuracy);
            if (result.final_accuracy >= tc.target_accuracy) break;
        } else if (tc.verbose && (step + 1) % tc.eval_every == 0) {
            std::fprintf(stderr, "[gen] step %d loss %.4f\n", step + 1, result.loss_trace.back());
        }
    }
    if (eval_pairs && result.final_accuracy < 0.0f)
        result.final_accuracy = teacher_forced_accuracy(model, codec, *eval_pairs);
    return result;
}

}  // namespace

GenTrainResult train_generator_on_pairs(GeneratorModel& model, const codec::CodecModel& codec,
                                        const std::vector<data::ClipPair>& pairs,
                                        const GenTrainConfig& tc) {
    require(!pairs.empty(), "train_generator_on_pairs: empty pair set");
    const int n = static_cast<int>(pairs.size());
    auto next_batch = [&, cursor = 0](Rng&) mutable {
        std::vector<const data::ClipPair*> batch;
        for (int b = 0; b < tc.batch_pairs; ++b) {
            batch.push_back(&pairs[static_cast<size_t>(cursor)]);
            cursor = (cursor + 1) % n;
        }
        return batch;
    };
    return train_loop(model, codec, tc, next_batch, &pairs);
}

GenTrainResult train_generator(GeneratorModel& model, const codec::CodecModel& codec,
                               const data::DatasetManifest& manifest,
                               const std::vector<const data::VideoRecord*>& records,
                               const GenTrainConfig& tc) {
    require(!records.empty(), "train_generator: no records");
    // pairs are materialized per step; storage stays on disk
    std::vector<data::ClipPair> scratch;
    auto next_batch = [&](Rng& rng) {
        scratch.clear();
        scratch.reserve(static_cast<size_t>(tc.batch_pairs));
        std::vector<const data::ClipPair*> batch;
        for (int b = 0; b < tc.batch_pairs; ++b) {
            const auto* rec = records[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(records.size()) - 1))];
            scratch.push_back(data::sample_clip_pair(manifest, *rec, rng));
            batch.push_back(&scratch.back());
        }
        return batch;
    };
    return train_loop(model, codec, tc, next_batch, nullptr);
}

}  // namespace condfoley::generator
