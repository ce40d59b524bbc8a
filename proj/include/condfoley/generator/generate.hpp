// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/dsp/griffin_lim.hpp"
#include "condfoley/generator/model.hpp"

namespace condfoley::generator {

struct GenerationParams {
    float temperature = 1.0f;
    int top_k = 32;
    int num_candidates = 100;  // used by re-ranked generation
    uint64_t seed = 0;
    bool drop_conditioning = false;  // no-conditioning ablation
    int griffin_lim_iters = 60;
    int nnls_iters = 30;
    int threads = 2;
};

// Autoregressive sampling of one 2 s code grid from a built inference prefix.
codec::CodeGrid sample_codes(const conditioning::TokenSequence& prefix,
                             const GeneratorModel& model, const codec::CodecModel& codec,
                             const GenerationParams& params);

// Full 2 s pipeline: codes -> mel -> Griffin-Lim waveform.
dsp::Waveform generate_soundtrack(const data::ClipPair& pair, const GeneratorModel& model,
                                  const codec::CodecModel& codec, const GenerationParams& params);

// Independent candidates (seeded per candidate, parallel across threads).
std::vector<dsp::Waveform> generate_candidates(const data::ClipPair& pair,
                                               const GeneratorModel& model,
                                               const codec::CodecModel& codec,
                                               const GenerationParams& params, int count);

// Sliding-window generation for clips longer than 2 s: each code is produced
// with its window placed so the target token sits centered among the visible
// tokens; overlapping decoded spectrogram windows are linearly cross-faded
// before a single Griffin-Lim inversion. The 2 s case degenerates to
// generate_soundtrack.
dsp::Waveform generate_long(const data::VideoClip& input_video, const data::ClipPair& cond,
                            const GeneratorModel& model, const codec::CodecModel& codec,
                            const GenerationParams& params);

}  // namespace condfoley::generator
