// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/dsp/griffin_lim.hpp"
#include "condfoley/nn/ops.hpp"

namespace condfoley::baselines {

struct StyleTransferParams {
    int iters = 200;
    float lr = 0.05f;
    float content_weight = 1.0f;
    float style_weight = 30.0f;
    uint64_t feature_seed = 17;  // fixed random conv stack
    int griffin_lim_iters = 60;
    int nnls_iters = 30;
};

struct StyleTransferResult {
    dsp::Waveform waveform;
    bool converged = true;  // false when the final loss never improved on the start
    std::vector<float> best_loss_trace;  // best-so-far, non-increasing
};

// Gram-statistics spectrogram stylization (oracle baseline: the content input
// is the held-out true audio). The optimized spectrogram starts from the
// content and matches style Gram matrices from a fixed random-weight conv
// stack; the best iterate is inverted with Griffin-Lim.
StyleTransferResult style_transfer_generate(const dsp::Waveform& content,
                                            const dsp::Waveform& style,
                                            const StyleTransferParams& params = {});

}  // namespace condfoley::baselines
