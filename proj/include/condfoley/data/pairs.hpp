// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/data/manifest.hpp"

namespace condfoley::data {

struct PairConfig {
    double clip_length = 2.0;
    double min_offset = 1.5;  // |dt| lower bound: caps clip overlap at 25%
    double max_offset = 6.0;
};

struct ClipWindow {
    std::string record_id;
    double center = 0.0;  // seconds in source time
};

struct ClipPairPlan {
    ClipWindow input, cond;
};

// Draw the (t, t + dt) window pair for the pretext task; both clips come from
// the same record. Throws when the record is shorter than two clip lengths.
ClipPairPlan sample_clip_pair_plan(const VideoRecord& rec, Rng& rng, const PairConfig& cfg = {});

// Random-conditional ablation: the conditional window comes from a different
// record drawn uniformly from the dataset.
ClipPairPlan sample_random_conditional_plan(const std::vector<const VideoRecord*>& dataset,
                                            const VideoRecord& input_rec, Rng& rng,
                                            const PairConfig& cfg = {});

// Materialize pixels, audio, and clip-local ground truth for a plan.
ClipPair load_clip_pair(const DatasetManifest& m, const ClipPairPlan& plan,
                        const PairConfig& cfg = {});
// One window only (input side of generation).
VideoClip load_clip_video(const DatasetManifest& m, const ClipWindow& w,
                          const PairConfig& cfg = {});
dsp::Waveform load_clip_audio(const DatasetManifest& m, const ClipWindow& w,
                              const PairConfig& cfg = {});

ClipPair sample_clip_pair(const DatasetManifest& m, const VideoRecord& rec, Rng& rng,
                          const PairConfig& cfg = {});
ClipPair sample_random_conditional(const DatasetManifest& m,
                                   const std::vector<const VideoRecord*>& dataset,
                                   const VideoRecord& input_rec, Rng& rng,
                                   const PairConfig& cfg = {});

// Ground-truth impact times falling inside a window, shifted to clip time.
std::vector<double> window_impacts(const VideoRecord& rec, double center, double clip_length);

}  // namespace condfoley::data
