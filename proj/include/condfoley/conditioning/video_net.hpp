// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "condfoley/data/types.hpp"
#include "condfoley/nn/layers.hpp"

namespace condfoley::conditioning {

struct VideoNetConfig {
    int in_height = 112, in_width = 112;
    std::vector<int> channels = {16, 32, 64, 96};
    int feature_dim = 1024;  // per-frame embedding width
    int gn_groups = 8;

    nlohmann::json to_json() const {
        return {{"in_height", in_height}, {"in_width", in_width}, {"channels", channels},
                {"feature_dim", feature_dim}, {"gn_groups", gn_groups}};
    }
    static VideoNetConfig from_json(const nlohmann::json& j) {
        VideoNetConfig c;
        c.in_height = j.at("in_height");
        c.in_width = j.at("in_width");
        c.channels = j.at("channels").get<std::vector<int>>();
        c.feature_dim = j.at("feature_dim");
        c.gn_groups = j.at("gn_groups");
        return c;
    }
};

// Factorized (2+1)D conv stack with no temporal striding: each stage applies
// a strided spatial conv then a stride-1 temporal conv, so the final layer
// keeps one feature column per input frame. Spatial average pooling plus a
// 1x1 projection yields one embedding per frame.
class VideoNet {
public:
    VideoNet() = default;
    VideoNet(nn::ParamStore& ps, const std::string& prefix, const VideoNetConfig& cfg, Rng& rng);

    // frames [T, 3, H, W] (a single clip) -> [T, feature_dim]
    nn::Tensor per_frame_features(const nn::Tensor& frames) const;
    // multi-clip batch [N*T, 3, H, W] with equal T -> [N*T, feature_dim]
    nn::Tensor per_frame_features_batch(const nn::Tensor& frames, int clips, int frames_per_clip) const;

    // total temporal receptive half-width in frames
    int temporal_half_receptive() const { return static_cast<int>(stages_.size()); }

    const VideoNetConfig& config() const { return cfg_; }

private:
    struct Stage {
        nn::Conv2dLayer spatial;
        nn::GroupNormLayer spatial_gn;
        nn::Conv2dLayer temporal;  // kernel [C,out][C,in] x 3 x 1 over [N, C, T, S]
        nn::GroupNormLayer temporal_gn;
    };
    VideoNetConfig cfg_;
    std::vector<Stage> stages_;
    nn::Linear proj_;
};

// One embedding per input frame (the tokenization T_v).
nn::Tensor video_tokens(const data::VideoClip& clip, const VideoNet& net);

}  // namespace condfoley::conditioning
