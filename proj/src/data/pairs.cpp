// SPDX-License-Identifier: Apache-2.0
#include "condfoley/data/pairs.hpp"

#include <algorithm>
#include <cmath>

#include "condfoley/data/frames.hpp"
#include "condfoley/dsp/wav.hpp"

namespace condfoley::data {

ClipPairPlan sample_clip_pair_plan(const VideoRecord& rec, Rng& rng, const PairConfig& cfg) {
    const double half = cfg.clip_length / 2.0;
    require(rec.duration >= 2.0 * cfg.clip_length,
            "sample_clip_pair: record " + rec.id + " shorter than two clip lengths");

    const double lo = half, hi = rec.duration - half;
    // sign first, then a center with at least min_offset of room on that side
    const int sign = rng.bernoulli(0.5) ? 1 : -1;
    const double t = sign > 0 ? rng.uniform(lo, hi - cfg.min_offset)
                              : rng.uniform(lo + cfg.min_offset, hi);
    const double room = sign > 0 ? hi - t : t - lo;
    const double dt = sign * rng.uniform(cfg.min_offset, std::min(cfg.max_offset, room));

    ClipPairPlan plan;
    plan.input = {rec.id, t};
    plan.cond = {rec.id, t + dt};
    return plan;
}

ClipPairPlan sample_random_conditional_plan(const std::vector<const VideoRecord*>& dataset,
                                            const VideoRecord& input_rec, Rng& rng,
                                            const PairConfig& cfg) {
    require(dataset.size() >= 2, "sample_random_conditional: need at least 2 records");
    const double half = cfg.clip_length / 2.0;
    require(input_rec.duration >= cfg.clip_length, "sample_random_conditional: input too short");

    std::vector<const VideoRecord*> others;
    for (const auto* r : dataset)
        if (r->id != input_rec.id && r->duration >= cfg.clip_length) others.push_back(r);
    require(!others.empty(), "sample_random_conditional: no other usable record");

    const auto* cond_rec = others[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(others.size()) - 1))];
    ClipPairPlan plan;
    plan.input = {input_rec.id, rng.uniform(half, input_rec.duration - half)};
    plan.cond = {cond_rec->id, rng.uniform(half, cond_rec->duration - half)};
    return plan;
}

std::vector<double> window_impacts(const VideoRecord& rec, double center, double clip_length) {
    std::vector<double> out;
    const double t0 = center - clip_length / 2.0;
    for (double t : rec.impact_times)
        if (t >= t0 && t < t0 + clip_length) out.push_back(t - t0);
    return out;
}

namespace {

int first_frame_of(const VideoRecord& rec, double center, double clip_length, int frames_needed) {
    const double t0 = center - clip_length / 2.0;
    int first = static_cast<int>(std::lround(t0 * rec.frame_rate));
    return std::clamp(first, 0, rec.frame_count - frames_needed);
}

}  // namespace

VideoClip load_clip_video(const DatasetManifest& m, const ClipWindow& w, const PairConfig& cfg) {
    const auto& rec = m.record(w.record_id);
    const int frames_needed = static_cast<int>(std::lround(cfg.clip_length * rec.frame_rate));
    const int first = first_frame_of(rec, w.center, cfg.clip_length, frames_needed);
    return load_clip_frames(m.root + "/" + rec.frames_dir, first, frames_needed, rec.frame_rate);
}

dsp::Waveform load_clip_audio(const DatasetManifest& m, const ClipWindow& w, const PairConfig& cfg) {
    const auto& rec = m.record(w.record_id);
    auto full = dsp::read_wav(m.root + "/" + rec.wav_path);
    const int frames_needed = static_cast<int>(std::lround(cfg.clip_length * rec.frame_rate));
    const int first = first_frame_of(rec, w.center, cfg.clip_length, frames_needed);
    // audio window aligned to the frame window
    const auto start = static_cast<int64_t>(std::llround(static_cast<double>(first) / rec.frame_rate *
                                                         full.sample_rate));
    const auto len = static_cast<int64_t>(std::llround(cfg.clip_length * full.sample_rate));
    dsp::Waveform out;
    out.sample_rate = full.sample_rate;
    out.samples.assign(static_cast<size_t>(len), 0.0f);
    for (int64_t i = 0; i < len; ++i) {
        const int64_t src = start + i;
        if (src >= 0 && src < static_cast<int64_t>(full.samples.size()))
            out.samples[static_cast<size_t>(i)] = full.samples[static_cast<size_t>(src)];
    }
    return out;
}

ClipPair load_clip_pair(const DatasetManifest& m, const ClipPairPlan& plan, const PairConfig& cfg) {
    const auto& in_rec = m.record(plan.input.record_id);
    const auto& cond_rec = m.record(plan.cond.record_id);

    ClipPair pair;
    pair.input_id = in_rec.id;
    pair.cond_id = cond_rec.id;
    pair.t_input = plan.input.center;
    pair.t_cond = plan.cond.center;
    pair.input_video = load_clip_video(m, plan.input, cfg);
    pair.input_audio = load_clip_audio(m, plan.input, cfg);
    pair.cond_video = load_clip_video(m, plan.cond, cfg);
    pair.cond_audio = load_clip_audio(m, plan.cond, cfg);
    pair.has_labels = in_rec.has_labels && cond_rec.has_labels;
    if (pair.has_labels) {
        pair.input_material = in_rec.material;
        pair.cond_material = cond_rec.material;
        pair.input_action = in_rec.action;
        pair.cond_action = cond_rec.action;
        // clip-local ground truth aligned the same way as the frame window
        const int frames_needed = static_cast<int>(std::lround(cfg.clip_length * in_rec.frame_rate));
        const double in_start = static_cast<double>(first_frame_of(in_rec, plan.input.center,
                                                                   cfg.clip_length, frames_needed)) /
                                in_rec.frame_rate;
        pair.input_impact_times = window_impacts(in_rec, in_start + cfg.clip_length / 2.0, cfg.clip_length);
        const double cond_start = static_cast<double>(first_frame_of(cond_rec, plan.cond.center,
                                                                     cfg.clip_length, frames_needed)) /
                                  cond_rec.frame_rate;
        pair.cond_impact_times = window_impacts(cond_rec, cond_start + cfg.clip_length / 2.0, cfg.clip_length);
    }
    return pair;
}

ClipPair sample_clip_pair(const DatasetManifest& m, const VideoRecord& rec, Rng& rng,
                          const PairConfig& cfg) {
    return load_clip_pair(m, sample_clip_pair_plan(rec, rng, cfg), cfg);
}

ClipPair sample_random_conditional(const DatasetManifest& m,
                                   const std::vector<const VideoRecord*>& dataset,
                                   const VideoRecord& input_rec, Rng& rng, const PairConfig& cfg) {
    return load_clip_pair(m, sample_random_conditional_plan(dataset, input_rec, rng, cfg), cfg);
}

}  // namespace condfoley::data
