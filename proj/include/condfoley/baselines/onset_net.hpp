// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/conditioning/video_net.hpp"
#include "condfoley/data/pairs.hpp"
#include "condfoley/nn/adam.hpp"
#include "condfoley/nn/checkpoint.hpp"

namespace condfoley::baselines {

// Per-frame onset probabilities from video: the stride-free backbone plus a
// one-logit head per frame.
struct OnsetNet {
    conditioning::VideoNetConfig vcfg;
    nn::ParamStore params;
    conditioning::VideoNet backbone;
    nn::Linear head;

    OnsetNet(const conditioning::VideoNetConfig& cfg, uint64_t seed) : vcfg(cfg) {
        Rng rng(seed);
        backbone = conditioning::VideoNet(params, "onset.video", vcfg, rng);
        head = nn::Linear::create(params, "onset.head", vcfg.feature_dim, 1, rng, 0.02f);
    }

    // [T] logits for one clip
    nn::Tensor frame_logits(const data::VideoClip& clip) const {
        auto feats = backbone.per_frame_features(nn::constant(clip.frames));
        return reshape(head(feats), {clip.num_frames()});
    }
    std::vector<float> frame_probs(const data::VideoClip& clip) const;
    // thresholded picks with non-max suppression, in seconds
    std::vector<double> detect_video_onsets(const data::VideoClip& clip, float threshold = 0.5f,
                                            int nms_frames = 2) const;

    void save(const std::string& path, nlohmann::json extra = {}) const;
    static OnsetNet load(const std::string& path);
};

struct OnsetNetTrainConfig {
    int steps = 600;
    int batch_clips = 4;
    float lr = 1e-4f;  // Adam, per the onset-detector schedule
    uint64_t seed = 0;
    float grad_clip = 5.0f;
    double target_ap = 0.0;  // early stop on frame AP (0 = off)
    int eval_every = 50;
    bool verbose = false;
};

struct OnsetClipSample {
    data::VideoClip clip;
    std::vector<double> onset_times;  // clip-local seconds
};

struct OnsetNetTrainResult {
    std::vector<float> loss_trace;
    float final_ap = -1.0f;
    int steps_run = 0;
};

// Weighted BCE: the positive frames of a clip share unit total weight, as do
// the negatives.
nn::Tensor onset_clip_loss(const OnsetNet& net, const OnsetClipSample& sample);

OnsetNetTrainResult train_video_onset_net(OnsetNet& net, const std::vector<OnsetClipSample>& clips,
                                          const OnsetNetTrainConfig& tc);

// frame-level average precision of predicted probabilities vs true onset frames
float frame_ap(const OnsetNet& net, const std::vector<OnsetClipSample>& clips);

std::vector<int> onset_frames(const std::vector<double>& times, int frame_rate, int num_frames);

}  // namespace condfoley::baselines
