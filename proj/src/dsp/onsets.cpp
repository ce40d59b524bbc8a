// SPDX-License-Identifier: Apache-2.0
#include "condfoley/dsp/onsets.hpp"

#include <algorithm>
#include <cmath>

#include "condfoley/dsp/mel.hpp"

namespace condfoley::dsp {

OnsetList detect_onsets(const Waveform& w, const OnsetConfig& cfg) {
    w.validate();
    OnsetList out;

    float clip_max = 0.0f;
    for (float s : w.samples) clip_max = std::max(clip_max, std::abs(s));
    if (clip_max <= 1e-6f) return out;  // silence: no onsets

    if (static_cast<int>(w.samples.size()) < cfg.mel.num_fft) return out;
    const auto m = compute_mel_spectrogram(w, cfg.mel);
    const int T = m.num_frames;
    if (T < 2) return out;

    // half-wave-rectified spectral flux, averaged over bands. Each band is
    // compared against its maximum over the last few frames so that fading
    // inside a sustained narrowband sound does not read as a new attack, and
    // a noise floor keeps log wobble near the eps floor from counting.
    const float floor_log = std::log(cfg.noise_floor);
    const int memory = std::max(1, cfg.memory_frames);
    std::vector<float> flux(static_cast<size_t>(T), 0.0f);
    for (int t = 1; t < T; ++t) {
        float acc = 0.0f;
        for (int f = 0; f < m.num_mels; ++f) {
            const float cur = std::max(m.at(t, f), floor_log);
            float prev = floor_log;
            for (int u = std::max(0, t - memory); u < t; ++u)
                prev = std::max(prev, m.at(u, f));
            acc += std::max(0.0f, cur - prev);
        }
        flux[static_cast<size_t>(t)] = acc / static_cast<float>(m.num_mels);
    }

    const double frame_dt = static_cast<double>(cfg.mel.hop_length) / cfg.mel.sample_rate;
    const int med_half = std::max(1, static_cast<int>(cfg.median_window_s / (2.0 * frame_dt)));
    const int gap_frames = std::max(1, static_cast<int>(std::ceil(cfg.min_gap_s / frame_dt)));

    std::vector<float> scratch;
    auto local_median = [&](int t) {
        const int lo = std::max(0, t - med_half);
        const int hi = std::min(T - 1, t + med_half);
        scratch.assign(flux.begin() + lo, flux.begin() + hi + 1);
        std::nth_element(scratch.begin(), scratch.begin() + scratch.size() / 2, scratch.end());
        return scratch[scratch.size() / 2];
    };

    const int rel_half = std::max(1, static_cast<int>(cfg.rel_window_s / frame_dt));
    auto local_max = [&](int t) {
        const int lo = std::max(0, t - rel_half);
        const int hi = std::min(T - 1, t + rel_half);
        float mx = 0.0f;
        for (int u = lo; u <= hi; ++u) mx = std::max(mx, flux[static_cast<size_t>(u)]);
        return mx;
    };

    int last_pick = -gap_frames - 1;
    for (int t = 1; t < T; ++t) {
        const float x = flux[static_cast<size_t>(t)];
        if (x < local_median(t) + cfg.threshold_delta) continue;
        if (x < cfg.rel_threshold * local_max(t)) continue;
        // local maximum within the minimum-gap neighborhood
        bool is_peak = true;
        for (int u = std::max(0, t - gap_frames); u <= std::min(T - 1, t + gap_frames); ++u)
            if (flux[static_cast<size_t>(u)] > x || (flux[static_cast<size_t>(u)] == x && u < t)) {
                is_peak = false;
                break;
            }
        if (!is_peak || t - last_pick <= gap_frames) continue;
        last_pick = t;

        const double t_sec =
            (static_cast<double>(t) * cfg.mel.hop_length + 0.5 * cfg.mel.num_fft) / cfg.mel.sample_rate;
        // confidence: peak amplitude near the onset over the clip max
        const int64_t s0 = static_cast<int64_t>(t) * cfg.mel.hop_length;
        const int64_t s1 = std::min<int64_t>(
            static_cast<int64_t>(w.samples.size()),
            s0 + cfg.mel.num_fft + static_cast<int64_t>(cfg.confidence_window_s * cfg.mel.sample_rate));
        float peak = 0.0f;
        for (int64_t i = s0; i < s1; ++i) peak = std::max(peak, std::abs(w.samples[static_cast<size_t>(i)]));
        const double conf = static_cast<double>(peak / clip_max);
        if (conf < cfg.min_confidence) continue;

        out.times.push_back(std::min(t_sec, w.duration()));
        out.confidences.push_back(conf);
    }
    return out;
}

}  // namespace condfoley::dsp
