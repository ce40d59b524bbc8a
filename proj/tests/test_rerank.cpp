// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "condfoley/rerank/rerank.hpp"

using namespace condfoley;
using namespace condfoley::rerank;

namespace {

// 2 s clip whose frames flash a block for 3 frames at each event
data::VideoClip event_video(const std::vector<double>& events) {
    data::VideoClip v;
    v.frame_rate = 15;
    v.frames = nn::NdArray({30, 3, 112, 112});
    for (double t : events) {
        const int f0 = static_cast<int>(std::lround(t * 15));
        if (f0 < 0 || f0 >= 30) continue;
        for (int64_t i = 0; i < 3LL * 112 * 112; ++i)
            v.frames[static_cast<int64_t>(f0) * 3 * 112 * 112 + i] = 0.9f;
    }
    return v;
}

dsp::Waveform event_audio(const std::vector<double>& events, double shift = 0.0) {
    dsp::Waveform a;
    a.sample_rate = 22050;
    a.samples.assign(44100, 0.0f);
    for (double t : events) {
        const double t_eff = t - shift;  // positive shift moves content earlier
        const auto s0 = static_cast<int64_t>(t_eff * a.sample_rate);
        for (int64_t i = 0; i < 4000; ++i) {
            const int64_t s = s0 + i;
            if (s < 0 || s >= 44100) continue;
            const double u = static_cast<double>(i) / a.sample_rate;
            a.samples[static_cast<size_t>(s)] +=
                0.7f * static_cast<float>(std::sin(2 * M_PI * 700.0 * u) * std::exp(-u / 0.05));
        }
    }
    return a;
}

// canned-estimate scorer: candidate index is encoded in its first sample
class StubScorer : public SyncScorer {
public:
    explicit StubScorer(std::vector<SyncEstimate> est) : est_(std::move(est)) {}
    SyncEstimate estimate(const data::VideoClip&, const dsp::Waveform& a) const override {
        return est_[static_cast<size_t>(std::lround(a.samples.at(0)))];
    }

private:
    std::vector<SyncEstimate> est_;
};

std::vector<dsp::Waveform> tagged_candidates(int n) {
    std::vector<dsp::Waveform> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<size_t>(i)].samples.assign(8, 0.0f);
        out[static_cast<size_t>(i)].samples[0] = static_cast<float>(i);
    }
    return out;
}

}  // namespace

TEST_CASE("sync offset: aligned audio scores near zero offset") {
    const std::vector<double> events = {0.4, 1.17};
    auto v = event_video(events);
    auto aligned = estimate_sync_offset(v, event_audio(events));
    CHECK(std::abs(aligned.offset) <= 0.05);
    auto shifted = estimate_sync_offset(v, event_audio(events, 0.3));
    CHECK(aligned.confidence > shifted.confidence);
}

TEST_CASE("sync offset: content shifted 0.3 s earlier reads as offset -0.3") {
    const std::vector<double> events = {0.6, 1.37};
    auto v = event_video(events);
    auto est = estimate_sync_offset(v, event_audio(events, 0.3));
    CHECK(std::abs(est.offset - (-0.3)) <= 0.05);
}

TEST_CASE("sync offset: silent audio and duration mismatch") {
    auto v = event_video({0.5});
    dsp::Waveform silent;
    silent.samples.assign(44100, 0.0f);
    auto est = estimate_sync_offset(v, silent);
    CHECK(est.confidence == 0.0);
    CHECK(est.offset == 0.0);

    dsp::Waveform shorty;
    shorty.samples.assign(11025, 0.1f);
    CHECK_THROWS(estimate_sync_offset(v, shorty));
}

TEST_CASE("rerank: worked offset/confidence example") {
    StubScorer scorer({{0.0, 0.4}, {0.5, 0.9}, {0.05, 0.8}});
    auto r = rerank_select(tagged_candidates(3), data::VideoClip{}, 0.2, scorer);
    CHECK(r.survivors == std::vector<int>{0, 2});
    CHECK(r.chosen == 2);
}

TEST_CASE("rerank: singleton, pure-confidence, and tie-break") {
    StubScorer one({{0.8, 0.1}});
    CHECK(rerank_select(tagged_candidates(1), data::VideoClip{}, 0.2, one).chosen == 0);

    StubScorer equal_offsets({{0.1, 0.1}, {0.1, 0.9}, {0.1, 0.5}});
    CHECK(rerank_select(tagged_candidates(3), data::VideoClip{}, 0.2, equal_offsets).chosen == 1);

    StubScorer tie({{0.0, 0.7}, {0.0, 0.7}});
    CHECK(rerank_select(tagged_candidates(2), data::VideoClip{}, 0.2, tie).chosen == 0);

    CHECK_THROWS(rerank_select({}, data::VideoClip{}, 0.2, one));
}

TEST_CASE("rerank: tau limits and order invariance") {
    std::vector<SyncEstimate> est = {{0.9, 0.99}, {0.02, 0.2}, {0.4, 0.8}, {-0.03, 0.5}};
    StubScorer scorer(est);
    auto cands = tagged_candidates(4);

    // tau -> infinity reduces to global argmax confidence
    CHECK(rerank_select(cands, data::VideoClip{}, 1e9, scorer).chosen == 0);
    // tau = 0: only minimum-|offset| candidates survive
    auto strict = rerank_select(cands, data::VideoClip{}, 0.0, scorer);
    CHECK(strict.survivors == std::vector<int>{1});
    CHECK(strict.chosen == 1);

    // the chosen candidate always satisfies the filter bound
    for (double tau : {0.0, 0.1, 0.5, 2.0}) {
        auto r = rerank_select(cands, data::VideoClip{}, tau, scorer);
        double min_abs = 1e9;
        for (const auto& e : r.estimates) min_abs = std::min(min_abs, std::abs(e.offset));
        CHECK(std::abs(r.estimates[static_cast<size_t>(r.chosen)].offset) <= min_abs + tau + 1e-12);
    }

    // permuting candidates permutes the selection consistently
    std::vector<SyncEstimate> perm_est = {est[2], est[0], est[3], est[1]};
    StubScorer perm_scorer(perm_est);
    auto r1 = rerank_select(cands, data::VideoClip{}, 0.5, scorer);
    auto r2 = rerank_select(cands, data::VideoClip{}, 0.5, perm_scorer);
    // index mapping: old 0->1, 1->3, 2->0, 3->2
    const int mapping[4] = {1, 3, 0, 2};
    CHECK(r2.chosen == mapping[r1.chosen]);
}
