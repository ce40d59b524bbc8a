// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/baselines/onset_net.hpp"

namespace condfoley::baselines {

struct OnsetTransferParams {
    uint64_t seed = 0;
    float threshold = 0.5f;
    int nms_frames = 2;
    double max_snippet = 0.5;  // onset-to-next-onset cap, seconds
};

// Copy-paste baseline: detect video onsets in both clips, then paste randomly
// chosen conditional audio snippets at the input onset times. Throws when the
// conditional video yields no onsets (continuous sounds defeat this method).
dsp::Waveform onset_transfer_generate(const data::VideoClip& input_video,
                                      const data::VideoClip& cond_video,
                                      const dsp::Waveform& cond_audio, const OnsetNet& net,
                                      const OnsetTransferParams& params = {});

}  // namespace condfoley::baselines
