// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/dsp/mel.hpp"
#include "condfoley/dsp/types.hpp"

namespace condfoley::dsp {

struct GriffinLimConfig {
    int num_iters = 60;
    int nnls_iters = 30;  // mel -> linear pseudo-inverse refinement steps
};

// Nonnegative mel -> power pseudo-inversion (multiplicative NNLS updates).
// Returns T x num_bins power values.
std::vector<float> mel_to_power(const MelSpectrogram& m, const MelFilterbank& bank,
                                int nnls_iters);

// Zero-phase-initialized Griffin-Lim. Deterministic; output clipped to [-1, 1].
Waveform griffin_lim_invert(const MelSpectrogram& m, int num_iters = 60,
                            int nnls_iters = 30);

// Overlap-add ISTFT used by Griffin-Lim (exposed for tests). magnitudes/phases
// are T x num_bins.
Waveform istft(const std::vector<float>& real, const std::vector<float>& imag,
               int num_frames, int num_fft, int hop_length, int sample_rate);

}  // namespace condfoley::dsp
