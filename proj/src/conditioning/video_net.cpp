// SPDX-License-Identifier: Apache-2.0
#include "condfoley/conditioning/video_net.hpp"

namespace condfoley::conditioning {

VideoNet::VideoNet(nn::ParamStore& ps, const std::string& prefix, const VideoNetConfig& cfg,
                   Rng& rng)
    : cfg_(cfg) {
    require(cfg_.channels.size() == 4, "video_net: expected 4 stages");
    auto groups_for = [&](int c) {
        int g = std::min(cfg_.gn_groups, c);
        while (c % g != 0) --g;
        return g;
    };
    int in_c = 3;
    for (size_t i = 0; i < cfg_.channels.size(); ++i) {
        const int out_c = cfg_.channels[i];
        const std::string p = prefix + ".s" + std::to_string(i);
        Stage st;
        if (i == 0)
            st.spatial = nn::Conv2dLayer::create(ps, p + ".sp", in_c, out_c, 5, 5, 4, 4, 2, 2, rng);
        else
            st.spatial = nn::Conv2dLayer::create(ps, p + ".sp", in_c, out_c, 3, 3, 2, 2, 1, 1, rng);
        st.spatial_gn = nn::GroupNormLayer::create(ps, p + ".sp_gn", out_c, groups_for(out_c));
        st.temporal = nn::Conv2dLayer::create(ps, p + ".tm", out_c, out_c, 3, 1, 1, 1, 1, 0, rng);
        st.temporal_gn = nn::GroupNormLayer::create(ps, p + ".tm_gn", out_c, groups_for(out_c));
        stages_.push_back(std::move(st));
        in_c = out_c;
    }
    proj_ = nn::Linear::create(ps, prefix + ".proj", cfg_.channels.back(), cfg_.feature_dim, rng);
}

nn::Tensor VideoNet::per_frame_features_batch(const nn::Tensor& frames, int clips,
                                              int frames_per_clip) const {
    require(frames->value.ndim() == 4 && frames->value.dim(1) == 3,
            "video_net: frames must be [N*T, 3, H, W]");
    require(frames->value.dim(0) == clips * frames_per_clip, "video_net: frame count mismatch");
    require(frames->value.dim(2) == cfg_.in_height && frames->value.dim(3) == cfg_.in_width,
            "video_net: frame size mismatch");

    nn::Tensor h = frames;  // [N*T, C, h, w]
    for (const auto& st : stages_) {
        h = silu(st.spatial_gn(st.spatial(h)));
        // temporal conv: [N*T, C, h, w] -> [N, C, T, h*w] -> conv k3x1 -> back.
        // Normalization happens per frame so a local edit stays local.
        const int C = h->value.dim(1), hh = h->value.dim(2), ww = h->value.dim(3);
        nn::Tensor t = reshape(h, {clips, frames_per_clip, C, hh * ww});
        t = permute(t, {0, 2, 1, 3});  // [N, C, T, S]
        t = st.temporal(t);
        t = permute(t, {0, 2, 1, 3});  // [N, T, C, S]
        h = reshape(t, {clips * frames_per_clip, C, hh, ww});
        h = silu(st.temporal_gn(h));
    }
    return proj_(mean_spatial(h));  // [N*T, feature_dim]
}

nn::Tensor VideoNet::per_frame_features(const nn::Tensor& frames) const {
    return per_frame_features_batch(frames, 1, frames->value.dim(0));
}

nn::Tensor video_tokens(const data::VideoClip& clip, const VideoNet& net) {
    require(clip.num_frames() >= 1, "video_tokens: empty clip");
    return net.per_frame_features(nn::constant(clip.frames));
}

}  // namespace condfoley::conditioning
