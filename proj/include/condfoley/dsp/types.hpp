// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "condfoley/common.hpp"

namespace condfoley::dsp {

constexpr int kDefaultSampleRate = 22050;
constexpr int kDefaultNumFft = 1024;
constexpr int kDefaultHop = 225;
constexpr int kDefaultNumMels = 80;
constexpr float kLogEps = 1e-5f;

struct Waveform {
    std::vector<float> samples;  // amplitudes in [-1, 1]
    int sample_rate = kDefaultSampleRate;

    double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
    void validate() const {
        require(sample_rate > 0, "waveform: sample_rate must be > 0");
        require(!samples.empty(), "waveform: empty");
        for (float s : samples)
            require(std::isfinite(s), "waveform: non-finite sample");
    }
};

struct MelConfig {
    int sample_rate = kDefaultSampleRate;
    int num_fft = kDefaultNumFft;
    int hop_length = kDefaultHop;
    int num_mels = kDefaultNumMels;
    float fmin = 0.0f;
    float fmax = 0.0f;  // 0 -> Nyquist
    float log_eps = kLogEps;

    float effective_fmax() const {
        return fmax > 0.0f ? fmax : 0.5f * static_cast<float>(sample_rate);
    }
    int num_frames(int64_t num_samples) const {
        return 1 + static_cast<int>((num_samples - num_fft) / hop_length);
    }
};

struct MelSpectrogram {
    std::vector<float> values;  // T x F, row-major, log-mel
    int num_frames = 0;         // T
    int num_mels = kDefaultNumMels;
    int num_fft = kDefaultNumFft;
    int hop_length = kDefaultHop;
    int sample_rate = kDefaultSampleRate;

    float& at(int t, int f) { return values[static_cast<size_t>(t) * num_mels + f]; }
    float at(int t, int f) const { return values[static_cast<size_t>(t) * num_mels + f]; }
};

struct OnsetList {
    std::vector<double> times;       // seconds, strictly increasing
    std::vector<double> confidences; // in [0, 1], one per onset

    size_t size() const { return times.size(); }
};

}  // namespace condfoley::dsp
