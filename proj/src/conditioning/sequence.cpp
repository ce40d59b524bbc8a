// SPDX-License-Identifier: Apache-2.0
#include "condfoley/conditioning/sequence.hpp"

namespace condfoley::conditioning {

ConditioningModule::ConditioningModule(nn::ParamStore& ps, const ConditioningConfig& cfg, Rng& rng)
    : cfg_(cfg) {
    video_net_ = VideoNet(ps, "cond.video", cfg_.video, rng);
    video_proj_ = nn::Linear::create(ps, "cond.video_proj", cfg_.video.feature_dim,
                                     cfg_.model_width, rng, 0.02f);
    audio_proj_ = nn::Linear::create(ps, "cond.audio_proj", cfg_.codec_embed_dim,
                                     cfg_.model_width, rng, 0.02f);
    segment_ = ps.add("cond.segment", nn::NdArray::randn({4, cfg_.model_width}, rng, 0.02f));
    position_ = ps.add("cond.position",
                       nn::NdArray::randn({cfg_.context_length, cfg_.model_width}, rng, 0.02f));
    start_ = ps.add("cond.start", nn::NdArray::randn({1, cfg_.model_width}, rng, 0.02f));
    nulls_ = ps.add("cond.nulls", nn::NdArray::randn({2, cfg_.model_width}, rng, 0.02f));
}

nn::NdArray audio_condition_tokens(const dsp::MelSpectrogram& cond_mel,
                                   const codec::CodecModel& codec) {
    const auto grid = codec.codes_from_spectrogram(cond_mel);
    const auto seq = codec::raster_flatten(grid);
    const int d = codec.config().embed_dim;
    const auto& cb = codec.codebook()->value;
    nn::NdArray rows({static_cast<int>(seq.size()), d});
    for (size_t i = 0; i < seq.size(); ++i)
        std::copy_n(&cb[static_cast<int64_t>(seq[i]) * d], d, &rows[static_cast<int64_t>(i) * d]);
    return rows;
}

TokenSequence build_sequence(const data::ClipPair& pair,
                             const std::optional<codec::CodeGrid>& targets,
                             const ConditioningModule& nets, const codec::CodecModel& codec,
                             const dsp::MelConfig& mel_cfg, const BuildOptions& opts) {
    const auto& cfg = nets.config();
    const int Lv = cfg.frames_per_clip;
    const int La = cfg.audio_tokens;

    nn::Tensor cond_video, input_video, cond_audio;
    if (opts.drop_conditioning) {
        cond_video = nets.null_rows(SegmentTag::kCondVideo, Lv);
        cond_audio = nets.null_rows(SegmentTag::kCondAudio, La);
    } else {
        nn::Tensor cv_feats = opts.cond_video_tokens
                                  ? opts.cond_video_tokens
                                  : video_tokens(pair.cond_video, nets.video_net());
        require(cv_feats->value.dim(0) == Lv, "build_sequence: conditional clip frame count");
        cond_video = nets.project_video(cv_feats);

        dsp::MelSpectrogram mel;
        if (!opts.cond_mel) mel = dsp::compute_mel_spectrogram(pair.cond_audio, mel_cfg);
        const auto rows = audio_condition_tokens(opts.cond_mel ? *opts.cond_mel : mel, codec);
        cond_audio = nets.project_audio(nn::constant(rows));
    }
    {
        nn::Tensor iv_feats = opts.input_video_tokens
                                  ? opts.input_video_tokens
                                  : video_tokens(pair.input_video, nets.video_net());
        require(iv_feats->value.dim(0) == Lv, "build_sequence: input clip frame count");
        input_video = nets.project_video(iv_feats);
    }

    // OUT_AUDIO inputs: start token, then ground-truth codes shifted right
    nn::Tensor out_block = nets.start_token();
    TokenSequence seq;
    if (targets) {
        require(static_cast<int>(targets->indices.size()) == La,
                "build_sequence: target code count mismatch");
        seq.target_codes = codec::raster_flatten(*targets);
        const int d = codec.config().embed_dim;
        const auto& cb = codec.codebook()->value;
        nn::NdArray rows({La - 1, d});
        for (int i = 0; i + 1 < La; ++i)
            std::copy_n(&cb[static_cast<int64_t>(seq.target_codes[static_cast<size_t>(i)]) * d], d,
                        &rows[static_cast<int64_t>(i) * d]);
        out_block = nn::concat_rows({out_block, nets.project_audio(nn::constant(rows))});
    }

    auto emb = nn::concat_rows({cond_video, input_video, cond_audio, out_block});
    const int n = emb->value.dim(0);
    require(n <= cfg.context_length, "build_sequence: sequence exceeds context length");

    seq.prefix_len = 2 * Lv + La;
    seq.tags.reserve(static_cast<size_t>(n));
    std::vector<int> tag_ids;
    for (int i = 0; i < n; ++i) {
        SegmentTag tag;
        if (i < Lv) tag = SegmentTag::kCondVideo;
        else if (i < 2 * Lv) tag = SegmentTag::kInputVideo;
        else if (i < seq.prefix_len) tag = SegmentTag::kCondAudio;
        else tag = SegmentTag::kOutAudio;
        seq.tags.push_back(tag);
        tag_ids.push_back(static_cast<int>(tag));
        seq.positions.push_back(i);
    }
    emb = add(emb, nets.segment_rows(tag_ids));
    emb = add(emb, nets.position_rows(seq.positions));
    seq.embeddings = emb;
    return seq;
}

}  // namespace condfoley::conditioning
