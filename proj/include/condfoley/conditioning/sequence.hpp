// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "condfoley/codec/model.hpp"
#include "condfoley/conditioning/video_net.hpp"
#include "condfoley/dsp/mel.hpp"

namespace condfoley::conditioning {

enum class SegmentTag { kCondVideo = 0, kInputVideo = 1, kCondAudio = 2, kOutAudio = 3 };

struct ConditioningConfig {
    int model_width = 256;
    int frames_per_clip = 30;
    int audio_tokens = 60;     // grid_t * grid_f
    int codec_embed_dim = 256;
    int context_length = 180;  // 30 + 30 + 60 + 60
    VideoNetConfig video;

    nlohmann::json to_json() const {
        return {{"model_width", model_width},     {"frames_per_clip", frames_per_clip},
                {"audio_tokens", audio_tokens},   {"codec_embed_dim", codec_embed_dim},
                {"context_length", context_length}, {"video", video.to_json()}};
    }
    static ConditioningConfig from_json(const nlohmann::json& j) {
        ConditioningConfig c;
        c.model_width = j.at("model_width");
        c.frames_per_clip = j.at("frames_per_clip");
        c.audio_tokens = j.at("audio_tokens");
        c.codec_embed_dim = j.at("codec_embed_dim");
        c.context_length = j.at("context_length");
        c.video = VideoNetConfig::from_json(j.at("video"));
        return c;
    }
};

// All conditioning-side trainables: the video backbone, the per-block linear
// projections into the model width, segment and position tables, the start
// token, and the learned null tokens used by the no-conditioning ablation.
class ConditioningModule {
public:
    ConditioningModule() = default;
    ConditioningModule(nn::ParamStore& ps, const ConditioningConfig& cfg, Rng& rng);

    const ConditioningConfig& config() const { return cfg_; }
    const VideoNet& video_net() const { return video_net_; }

    nn::Tensor project_video(const nn::Tensor& feats) const { return video_proj_(feats); }
    nn::Tensor project_audio(const nn::Tensor& rows) const { return audio_proj_(rows); }
    nn::Tensor segment_rows(const std::vector<int>& tags) const { return embedding(segment_, tags); }
    nn::Tensor position_rows(const std::vector<int>& pos) const { return embedding(position_, pos); }
    nn::Tensor start_token() const { return start_; }
    nn::Tensor null_rows(SegmentTag tag, int count) const {
        return embedding(nulls_, std::vector<int>(static_cast<size_t>(count),
                                                  tag == SegmentTag::kCondVideo ? 0 : 1));
    }

private:
    ConditioningConfig cfg_;
    VideoNet video_net_;
    nn::Linear video_proj_, audio_proj_;
    nn::Tensor segment_;   // [4, width]
    nn::Tensor position_;  // [context, width]
    nn::Tensor start_;     // [1, width]
    nn::Tensor nulls_;     // [2, width]: COND_VIDEO, COND_AUDIO replacements
};

struct TokenSequence {
    nn::Tensor embeddings;  // [n, model_width]
    std::vector<SegmentTag> tags;
    std::vector<int> positions;
    int prefix_len = 0;
    std::vector<int> target_codes;  // teacher-forcing targets when present
};

// Quantized conditional-audio tokens in raster order: [60, d] rows that are
// exact codebook entries (the tokenization T_a).
nn::NdArray audio_condition_tokens(const dsp::MelSpectrogram& cond_mel,
                                   const codec::CodecModel& codec);

struct BuildOptions {
    bool drop_conditioning = false;               // learned-null ablation
    const dsp::MelSpectrogram* cond_mel = nullptr;  // precomputed/augmented mel
    // precomputed video tokens (e.g. sliced from a longer run), [T, feat]
    nn::Tensor input_video_tokens;
    nn::Tensor cond_video_tokens;
};

TokenSequence build_sequence(const data::ClipPair& pair,
                             const std::optional<codec::CodeGrid>& targets,
                             const ConditioningModule& nets, const codec::CodecModel& codec,
                             const dsp::MelConfig& mel_cfg, const BuildOptions& opts = {});

}  // namespace condfoley::conditioning
