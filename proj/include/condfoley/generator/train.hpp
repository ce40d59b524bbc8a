// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/data/pairs.hpp"
#include "condfoley/generator/model.hpp"
#include "condfoley/nn/adam.hpp"

namespace condfoley::generator {

struct GenTrainConfig {
    int steps = 3000;
    int batch_pairs = 4;
    float lr = 1.6e-4f;  // Adam, as used for the transformer stage
    uint64_t seed = 0;
    float grad_clip = 1.0f;
    double cond_dropout = 0.1;  // trains the null tokens for the ablation
    bool augment = true;        // masking on the conditional spectrogram
    int aug_freq_mask = 12;
    int aug_time_mask = 20;
    double target_accuracy = 0.0;  // early stop on teacher-forced accuracy (0 = off)
    int eval_every = 50;
    bool verbose = false;
};

struct GenTrainResult {
    std::vector<float> loss_trace;
    float final_accuracy = -1.0f;
    int steps_run = 0;
};

// One optimization step over materialized pairs; returns the batch loss.
float train_generator_step(GeneratorModel& model, const codec::CodecModel& codec,
                           const std::vector<const data::ClipPair*>& batch, nn::Adam& opt,
                           const GenTrainConfig& tc, Rng& rng);

// Overfit-style training on a fixed pair set.
GenTrainResult train_generator_on_pairs(GeneratorModel& model, const codec::CodecModel& codec,
                                        const std::vector<data::ClipPair>& pairs,
                                        const GenTrainConfig& tc);

// Full training: samples clip pairs from the records each step.
GenTrainResult train_generator(GeneratorModel& model, const codec::CodecModel& codec,
                               const data::DatasetManifest& manifest,
                               const std::vector<const data::VideoRecord*>& records,
                               const GenTrainConfig& tc);

// Teacher-forced token accuracy (argmax vs ground-truth codes), no dropout
// or augmentation.
float teacher_forced_accuracy(const GeneratorModel& model, const codec::CodecModel& codec,
                              const std::vector<data::ClipPair>& pairs);

}  // namespace condfoley::generator
