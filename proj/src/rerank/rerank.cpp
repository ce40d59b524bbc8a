// SPDX-License-Identifier: Apache-2.0
#include "condfoley/rerank/rerank.hpp"

#include <algorithm>
#include <cmath>

namespace condfoley::rerank {

namespace {

// frame-difference magnitude per frame, linearly resampled to the envelope rate
std::vector<double> motion_envelope(const data::VideoClip& v, double rate) {
    const int T = v.num_frames();
    const int64_t plane = static_cast<int64_t>(v.frames.dim(1)) * v.frames.dim(2) * v.frames.dim(3);
    std::vector<double> per_frame(static_cast<size_t>(T), 0.0);
    for (int t = 1; t < T; ++t) {
        const float* a = &v.frames[static_cast<int64_t>(t) * plane];
        const float* b = &v.frames[static_cast<int64_t>(t - 1) * plane];
        double acc = 0.0;
        for (int64_t i = 0; i < plane; ++i) acc += std::abs(static_cast<double>(a[i]) - b[i]);
        per_frame[static_cast<size_t>(t)] = acc / static_cast<double>(plane);
    }
    const int n = static_cast<int>(v.duration() * rate);
    std::vector<double> env(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double src = static_cast<double>(i) / rate * v.frame_rate;
        const int lo = std::clamp(static_cast<int>(src), 0, T - 1);
        const int hi = std::min(lo + 1, T - 1);
        const double frac = src - lo;
        env[static_cast<size_t>(i)] = per_frame[static_cast<size_t>(lo)] * (1.0 - frac) +
                                      per_frame[static_cast<size_t>(hi)] * frac;
    }
    return env;
}

std::vector<double> amplitude_envelope(const dsp::Waveform& a, double rate) {
    const int n = static_cast<int>(a.duration() * rate);
    const auto bin = static_cast<int64_t>(a.sample_rate / rate);
    std::vector<double> env(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const int64_t s0 = static_cast<int64_t>(i) * bin;
        const int64_t s1 = std::min<int64_t>(s0 + bin, static_cast<int64_t>(a.samples.size()));
        double acc = 0.0;
        for (int64_t s = s0; s < s1; ++s) acc += std::abs(a.samples[static_cast<size_t>(s)]);
        env[static_cast<size_t>(i)] = s1 > s0 ? acc / static_cast<double>(s1 - s0) : 0.0;
    }
    return env;
}

// Pearson correlation of v[t] against a[t + lag_bins] over the overlap
double correlation_at(const std::vector<double>& v, const std::vector<double>& a, int lag_bins) {
    double sv = 0, sa = 0, svv = 0, saa = 0, sva = 0;
    int n = 0;
    for (int t = 0; t < static_cast<int>(v.size()); ++t) {
        const int u = t + lag_bins;
        if (u < 0 || u >= static_cast<int>(a.size())) continue;
        const double x = v[static_cast<size_t>(t)];
        const double y = a[static_cast<size_t>(u)];
        sv += x;
        sa += y;
        svv += x * x;
        saa += y * y;
        sva += x * y;
        ++n;
    }
    if (n < 4) return 0.0;
    const double cov = sva / n - (sv / n) * (sa / n);
    const double var_v = svv / n - (sv / n) * (sv / n);
    const double var_a = saa / n - (sa / n) * (sa / n);
    if (var_v <= 1e-12 || var_a <= 1e-12) return 0.0;
    return cov / std::sqrt(var_v * var_a);
}

}  // namespace

SyncEstimate EnvelopeCorrelationScorer::estimate(const data::VideoClip& video,
                                                 const dsp::Waveform& audio) const {
    require(std::abs(video.duration() - audio.duration()) < 0.51,
            "estimate_sync_offset: duration mismatch");
    float peak = 0.0f;
    for (float s : audio.samples) peak = std::max(peak, std::abs(s));
    if (peak <= 1e-6f) return {0.0, 0.0};  // silent audio

    const auto ev = motion_envelope(video, cfg_.envelope_rate);
    const auto ea = amplitude_envelope(audio, cfg_.envelope_rate);

    SyncEstimate best;
    bool first = true;
    const int lag_max = static_cast<int>(std::round(cfg_.search_range * cfg_.envelope_rate));
    const int lag_step = std::max(1, static_cast<int>(std::round(cfg_.step * cfg_.envelope_rate)));
    for (int lag = -lag_max; lag <= lag_max; lag += lag_step) {
        const double c = correlation_at(ev, ea, lag);
        if (first || c > best.confidence) {
            first = false;
            best.confidence = c;
            best.offset = static_cast<double>(lag) / cfg_.envelope_rate;
        }
    }
    best.confidence = std::clamp(best.confidence, 0.0, 1.0);
    return best;
}

SyncEstimate estimate_sync_offset(const data::VideoClip& video, const dsp::Waveform& audio,
                                  const SyncScorerConfig& cfg) {
    return EnvelopeCorrelationScorer(cfg).estimate(video, audio);
}

RerankResult rerank_select(const std::vector<dsp::Waveform>& candidates,
                           const data::VideoClip& video, double tau, const SyncScorer& scorer) {
    require(!candidates.empty(), "rerank_select: empty candidate list");
    RerankResult r;
    r.estimates.reserve(candidates.size());
    for (const auto& c : candidates) r.estimates.push_back(scorer.estimate(video, c));

    double min_abs = std::abs(r.estimates[0].offset);
    for (const auto& e : r.estimates) min_abs = std::min(min_abs, std::abs(e.offset));

    int best = -1;
    for (int i = 0; i < static_cast<int>(r.estimates.size()); ++i) {
        if (std::abs(r.estimates[static_cast<size_t>(i)].offset) > min_abs + tau) continue;
        r.survivors.push_back(i);
        if (best < 0 || r.estimates[static_cast<size_t>(i)].confidence >
                            r.estimates[static_cast<size_t>(best)].confidence)
            best = i;
    }
    r.chosen = best;
    return r;
}

}  // namespace condfoley::rerank
