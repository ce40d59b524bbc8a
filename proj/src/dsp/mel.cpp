// SPDX-License-Identifier: Apache-2.0
#include "condfoley/dsp/mel.hpp"

#include <algorithm>
#include <cmath>

#include "condfoley/dsp/fft.hpp"

namespace condfoley::dsp {

float hz_to_mel(float hz) { return 2595.0f * std::log10(1.0f + hz / 700.0f); }
float mel_to_hz(float mel) { return 700.0f * (std::pow(10.0f, mel / 2595.0f) - 1.0f); }

void MelFilterbank::apply(const float* power, float* out_mel) const {
    for (int m = 0; m < num_mels; ++m) {
        const float* row = &weights[static_cast<size_t>(m) * num_bins];
        float acc = 0.0f;
        for (int k = 0; k < num_bins; ++k) acc += row[k] * power[k];
        out_mel[m] = acc;
    }
}

MelFilterbank mel_filterbank(int num_mels, int num_fft, int sample_rate,
                             float fmin, float fmax) {
    require(num_mels >= 1, "mel_filterbank: num_mels must be >= 1");
    require(num_fft >= 2 && (num_fft & (num_fft - 1)) == 0,
            "mel_filterbank: num_fft must be a power of two");
    const int num_bins = num_fft / 2 + 1;
    require(num_mels <= num_bins,
            "mel_filterbank: num_mels exceeds num_fft/2+1 (under-determined bank)");

    if (fmax <= 0.0f) fmax = 0.5f * static_cast<float>(sample_rate);
    fmax = std::min(fmax, 0.5f * static_cast<float>(sample_rate));

    const float mel_lo = hz_to_mel(fmin);
    const float mel_hi = hz_to_mel(fmax);
    std::vector<float> pts(static_cast<size_t>(num_mels) + 2);
    for (int i = 0; i < num_mels + 2; ++i)
        pts[static_cast<size_t>(i)] =
            mel_lo + (mel_hi - mel_lo) * static_cast<float>(i) / static_cast<float>(num_mels + 1);

    MelFilterbank bank;
    bank.num_mels = num_mels;
    bank.num_bins = num_bins;
    bank.weights.assign(static_cast<size_t>(num_mels) * num_bins, 0.0f);
    bank.center_hz.resize(static_cast<size_t>(num_mels));

    for (int m = 0; m < num_mels; ++m) {
        float left_mel = pts[static_cast<size_t>(m)];
        const float center_mel = pts[static_cast<size_t>(m) + 1];
        const float right_mel = pts[static_cast<size_t>(m) + 2];
        // Mirror the first filter's lower edge so bins below the first
        // center (including DC when fmin == 0) get nonzero weight.
        if (m == 0) left_mel = 2.0f * left_mel - center_mel;

        const float left = mel_to_hz(left_mel);
        const float center = mel_to_hz(center_mel);
        const float right = mel_to_hz(right_mel);
        bank.center_hz[static_cast<size_t>(m)] = center;

        float peak = 0.0f;
        for (int k = 0; k < num_bins; ++k) {
            const float f = static_cast<float>(k) * sample_rate / static_cast<float>(num_fft);
            float w = 0.0f;
            if (f >= left && f <= center && center > left)
                w = (f - left) / (center - left);
            else if (f > center && f <= right && right > center)
                w = (right - f) / (right - center);
            bank.weights[static_cast<size_t>(m) * num_bins + k] = w;
            peak = std::max(peak, w);
        }
        if (peak > 0.0f)
            for (int k = 0; k < num_bins; ++k)
                bank.weights[static_cast<size_t>(m) * num_bins + k] /= peak;
    }
    return bank;
}

PowerSpectrogram stft_power(const Waveform& w, int num_fft, int hop_length) {
    require(static_cast<int64_t>(w.samples.size()) >= num_fft,
            "stft: waveform shorter than the analysis window");
    const int num_bins = num_fft / 2 + 1;
    const int frames = 1 + static_cast<int>(
        (static_cast<int64_t>(w.samples.size()) - num_fft) / hop_length);

    std::vector<float> window(static_cast<size_t>(num_fft));
    for (int i = 0; i < num_fft; ++i)
        window[static_cast<size_t>(i)] =
            0.5f - 0.5f * std::cos(2.0 * M_PI * i / static_cast<double>(num_fft));

    PowerSpectrogram sp;
    sp.num_frames = frames;
    sp.num_bins = num_bins;
    sp.values.resize(static_cast<size_t>(frames) * num_bins);

    std::vector<float> frame(static_cast<size_t>(num_fft));
    for (int t = 0; t < frames; ++t) {
        const float* src = w.samples.data() + static_cast<size_t>(t) * hop_length;
        for (int i = 0; i < num_fft; ++i) frame[static_cast<size_t>(i)] = src[i] * window[static_cast<size_t>(i)];
        auto bins = rfft(frame.data(), num_fft);
        for (int k = 0; k < num_bins; ++k)
            sp.values[static_cast<size_t>(t) * num_bins + k] = std::norm(bins[static_cast<size_t>(k)]);
    }
    return sp;
}

MelSpectrogram compute_mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
    w.validate();
    require(static_cast<int>(w.samples.size()) >= cfg.num_fft,
            "compute_mel_spectrogram: waveform shorter than num_fft");
    const auto bank = mel_filterbank(cfg.num_mels, cfg.num_fft, cfg.sample_rate,
                                     cfg.fmin, cfg.effective_fmax());
    const auto power = stft_power(w, cfg.num_fft, cfg.hop_length);

    MelSpectrogram m;
    m.num_frames = power.num_frames;
    m.num_mels = cfg.num_mels;
    m.num_fft = cfg.num_fft;
    m.hop_length = cfg.hop_length;
    m.sample_rate = cfg.sample_rate;
    m.values.resize(static_cast<size_t>(m.num_frames) * m.num_mels);

    std::vector<float> mel_energy(static_cast<size_t>(cfg.num_mels));
    for (int t = 0; t < m.num_frames; ++t) {
        bank.apply(&power.values[static_cast<size_t>(t) * power.num_bins], mel_energy.data());
        for (int f = 0; f < cfg.num_mels; ++f)
            m.at(t, f) = std::log(mel_energy[static_cast<size_t>(f)] + cfg.log_eps);
    }
    return m;
}

}  // namespace condfoley::dsp
