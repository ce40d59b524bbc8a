// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "condfoley/codec/loss.hpp"
#include "condfoley/codec/model.hpp"

namespace condfoley::codec {

// Optional perceptual feature extractor: normalized spectrogram batch
// [N,1,T,F] -> per-layer feature maps [N,C,h,w], shallowest first.
using FeatureExtractor = std::function<std::vector<nn::Tensor>(const nn::Tensor&)>;

struct CodecTrainConfig {
    int epochs = 200;
    int batch_size = 8;
    float lr = 1.44e-4f;  // Adam, as used for the VQGAN stage
    float lr_min_frac = 0.1f;  // cosine decay floor as a fraction of lr
    float disc_lr = 1.44e-4f;
    uint64_t seed = 0;
    float adv_start_frac = 0.1f;  // adversarial term off for the first 10% of steps
    float grad_clip = 5.0f;
    CodecLossConfig loss;
    float target_l1 = 0.0f;  // early stop once log-domain L1 drops below (0 = off)
    int eval_every = 10;     // epochs between L1 evaluations
    int eval_max_clips = 64;
    bool verbose = false;
};

struct CodecTrainResult {
    std::vector<float> loss_trace;  // per-step totals
    float final_l1_log = -1.0f;
    int epochs_run = 0;
};

CodecTrainResult train_codec(CodecModel& model, const std::vector<dsp::MelSpectrogram>& clips,
                             const CodecTrainConfig& tc, const FeatureExtractor* perceptual = nullptr);

// Mean |S - S_hat| in log-mel units over the given clips.
float reconstruction_l1_log(const CodecModel& model, const std::vector<dsp::MelSpectrogram>& clips,
                            int max_clips = 0);

}  // namespace condfoley::codec
