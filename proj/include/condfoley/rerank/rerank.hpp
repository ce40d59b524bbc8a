// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/data/types.hpp"

namespace condfoley::rerank {

// Signed audio-video offset and scorer confidence. Positive offset means the
// audio lags the video (its events happen later than the motion).
struct SyncEstimate {
    double offset = 0.0;
    double confidence = 0.0;
};

struct SyncScorerConfig {
    double search_range = 1.0;   // offsets swept over [-range, +range]
    double step = 0.05;
    double envelope_rate = 20.0;  // Hz
};

// Pluggable synchrony scorer; the default correlates the video motion-energy
// envelope against the audio amplitude envelope. A learned model can slot in
// behind the same interface.
class SyncScorer {
public:
    virtual ~SyncScorer() = default;
    virtual SyncEstimate estimate(const data::VideoClip& video, const dsp::Waveform& audio) const = 0;
};

class EnvelopeCorrelationScorer : public SyncScorer {
public:
    explicit EnvelopeCorrelationScorer(SyncScorerConfig cfg = {}) : cfg_(cfg) {}
    SyncEstimate estimate(const data::VideoClip& video, const dsp::Waveform& audio) const override;

private:
    SyncScorerConfig cfg_;
};

SyncEstimate estimate_sync_offset(const data::VideoClip& video, const dsp::Waveform& audio,
                                  const SyncScorerConfig& cfg = {});

struct RerankResult {
    int chosen = 0;
    std::vector<SyncEstimate> estimates;
    std::vector<int> survivors;  // indices that pass the min|t| + tau filter
};

// Offset-filter-then-confidence rule: drop candidates with |offset| greater
// than min|offset| + tau, then pick the highest confidence (ties -> lowest
// index).
RerankResult rerank_select(const std::vector<dsp::Waveform>& candidates,
                           const data::VideoClip& video, double tau, const SyncScorer& scorer);

}  // namespace condfoley::rerank
