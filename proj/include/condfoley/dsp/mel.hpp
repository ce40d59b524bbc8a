// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "condfoley/dsp/types.hpp"

namespace condfoley::dsp {

float hz_to_mel(float hz);
float mel_to_hz(float mel);

// Triangular mel filterbank, rows peak-normalized to 1. Shape:
// num_mels x (num_fft/2 + 1), row-major. The first filter's rising edge is
// mirrored below fmin so that the DC bin stays covered.
struct MelFilterbank {
    std::vector<float> weights;
    std::vector<float> center_hz;  // per-filter peak frequency
    int num_mels = 0;
    int num_bins = 0;

    float at(int m, int k) const { return weights[static_cast<size_t>(m) * num_bins + k]; }
    // out[m] = sum_k w[m,k] * power[k]
    void apply(const float* power, float* out_mel) const;
};

MelFilterbank mel_filterbank(int num_mels, int num_fft, int sample_rate,
                             float fmin = 0.0f, float fmax = 0.0f);

// Hann-windowed power STFT without centering: T = 1 + floor((n - num_fft)/hop).
// Row-major T x (num_fft/2 + 1).
struct PowerSpectrogram {
    std::vector<float> values;
    int num_frames = 0;
    int num_bins = 0;
    float at(int t, int k) const { return values[static_cast<size_t>(t) * num_bins + k]; }
};

PowerSpectrogram stft_power(const Waveform& w, int num_fft, int hop_length);

MelSpectrogram compute_mel_spectrogram(const Waveform& w, const MelConfig& cfg);

}  // namespace condfoley::dsp
