// SPDX-License-Identifier: Apache-2.0
#include "condfoley/codec/model.hpp"

namespace condfoley::codec {

nlohmann::json CodecConfig::to_json() const {
    return {{"codebook_size", codebook_size}, {"embed_dim", embed_dim},
            {"grid_t", grid_t},               {"grid_f", grid_f},
            {"in_frames", in_frames},         {"in_mels", in_mels},
            {"channels", channels},           {"gn_groups", gn_groups},
            {"norm_offset", norm_offset},     {"norm_scale", norm_scale}};
}

CodecConfig CodecConfig::from_json(const nlohmann::json& j) {
    CodecConfig c;
    c.codebook_size = j.at("codebook_size");
    c.embed_dim = j.at("embed_dim");
    c.grid_t = j.at("grid_t");
    c.grid_f = j.at("grid_f");
    c.in_frames = j.at("in_frames");
    c.in_mels = j.at("in_mels");
    c.channels = j.at("channels").get<std::vector<int>>();
    c.gn_groups = j.at("gn_groups");
    c.norm_offset = j.at("norm_offset");
    c.norm_scale = j.at("norm_scale");
    return c;
}

CodecModel::CodecModel(const CodecConfig& cfg, uint64_t seed) : cfg_(cfg) {
    require(cfg_.codebook_size >= 2, "codec: codebook needs at least 2 entries");
    require(cfg_.channels.size() == 4, "codec: expected 4 encoder stages");
    const int stride_total = 16;  // 4 stages of stride 2
    require(cfg_.in_frames == cfg_.grid_t * stride_total &&
                cfg_.in_mels == cfg_.grid_f * stride_total,
            "codec: input size must be 16x the latent grid");

    Rng rng(seed);
    const auto& ch = cfg_.channels;
    auto groups_for = [&](int c) {
        int g = std::min(cfg_.gn_groups, c);
        while (c % g != 0) --g;
        return g;
    };

    int in_c = 1;
    for (size_t i = 0; i < ch.size(); ++i) {
        enc_.push_back(nn::Conv2dLayer::create(params_, "enc.conv" + std::to_string(i), in_c,
                                               ch[i], 4, 4, 2, 2, 1, 1, rng));
        enc_gn_.push_back(
            nn::GroupNormLayer::create(params_, "enc.gn" + std::to_string(i), ch[i], groups_for(ch[i])));
        in_c = ch[i];
    }
    enc_out_ = nn::Conv2dLayer::create(params_, "enc.out", ch.back(), cfg_.embed_dim, 3, 3, 1, 1,
                                       1, 1, rng);

    codebook_ = params_.add("codebook.entries",
                            nn::NdArray::randn({cfg_.codebook_size, cfg_.embed_dim}, rng, 0.02f));

    dec_in_ = nn::Conv2dLayer::create(params_, "dec.in", cfg_.embed_dim, ch.back(), 3, 3, 1, 1, 1,
                                      1, rng);
    dec_in_gn_ = nn::GroupNormLayer::create(params_, "dec.in_gn", ch.back(), groups_for(ch.back()));
    for (int i = static_cast<int>(ch.size()) - 1; i > 0; --i) {
        const std::string name = "dec.conv" + std::to_string(ch.size() - 1 - i);
        dec_.push_back(nn::Conv2dLayer::create(params_, name, ch[static_cast<size_t>(i)],
                                               ch[static_cast<size_t>(i - 1)], 3, 3, 1, 1, 1, 1, rng));
        dec_gn_.push_back(nn::GroupNormLayer::create(params_, name + "_gn",
                                                     ch[static_cast<size_t>(i - 1)],
                                                     groups_for(ch[static_cast<size_t>(i - 1)])));
    }
    // the final stage carries no normalization: per-sample group statistics
    // would keep constant (silent) regions from settling exactly
    dec_pre_ = nn::Conv2dLayer::create(params_, "dec.pre", ch.front(), 16, 3, 3, 1, 1, 1, 1, rng);
    dec_out_ = nn::Conv2dLayer::create(params_, "dec.out", 16, 1, 3, 3, 1, 1, 1, 1, rng);


    for (int s = 0; s < 2; ++s) {
        const std::string p = "disc.s" + std::to_string(s);
        DiscScale d;
        d.c1 = nn::Conv2dLayer::create(disc_params_, p + ".c1", 1, 32, 4, 4, 2, 2, 1, 1, rng);
        d.c2 = nn::Conv2dLayer::create(disc_params_, p + ".c2", 32, 64, 4, 4, 2, 2, 1, 1, rng);
        d.gn = nn::GroupNormLayer::create(disc_params_, p + ".gn", 64, 8);
        d.out = nn::Conv2dLayer::create(disc_params_, p + ".out", 64, 1, 3, 3, 1, 1, 1, 1, rng);
        disc_.push_back(std::move(d));
    }
}

nn::NdArray CodecModel::normalize_batch(const std::vector<const dsp::MelSpectrogram*>& clips) const {
    const int N = static_cast<int>(clips.size());
    require(N > 0, "codec: empty batch");
    nn::NdArray x({N, 1, cfg_.in_frames, cfg_.in_mels});
    for (int n = 0; n < N; ++n) {
        validate_input(*clips[static_cast<size_t>(n)]);
        const auto& m = *clips[static_cast<size_t>(n)];
        float* dst = &x[static_cast<int64_t>(n) * cfg_.in_frames * cfg_.in_mels];
        for (size_t i = 0; i < m.values.size(); ++i) dst[i] = normalize_value(m.values[i]);
    }
    return x;
}

void CodecModel::validate_input(const dsp::MelSpectrogram& m) const {
    require(m.num_frames == cfg_.in_frames && m.num_mels == cfg_.in_mels,
            "codec: spectrogram shape " + std::to_string(m.num_frames) + "x" +
                std::to_string(m.num_mels) + " does not match encoder input " +
                std::to_string(cfg_.in_frames) + "x" + std::to_string(cfg_.in_mels));
}

nn::Tensor CodecModel::encode_rows(const nn::Tensor& x) const {
    nn::Tensor h = x;
    for (size_t i = 0; i < enc_.size(); ++i) h = silu(enc_gn_[i](enc_[i](h)));
    h = enc_out_(h);  // [N, d, gT, gF]
    const int N = h->value.dim(0);
    h = permute(h, {0, 2, 3, 1});  // [N, gT, gF, d]
    return reshape(h, {N * cfg_.grid_t * cfg_.grid_f, cfg_.embed_dim});
}

nn::Tensor CodecModel::decode_rows(const nn::Tensor& zq_rows, int batch) const {
    nn::Tensor h = reshape(zq_rows, {batch, cfg_.grid_t, cfg_.grid_f, cfg_.embed_dim});
    h = permute(h, {0, 3, 1, 2});  // [N, d, gT, gF]
    h = silu(dec_in_gn_(dec_in_(h)));
    for (size_t i = 0; i < dec_.size(); ++i) h = silu(dec_gn_[i](dec_[i](upsample2x(h))));
    h = silu(dec_pre_(upsample2x(h)));
    auto pre = dec_out_(h);
    // log-mel never dips below the eps floor (normalized -1); a rectified
    // output pinned there makes exact silence representable
    return add_scalar(leaky_relu(add_scalar(pre, 1.0f), 0.02f), -1.0f);  // [N,1,T,F]
}

std::vector<nn::Tensor> CodecModel::discriminate(const nn::Tensor& x) const {
    std::vector<nn::Tensor> out;
    nn::Tensor in = x;
    for (const auto& d : disc_) {
        nn::Tensor h = leaky_relu(d.c1(in), 0.2f);
        h = leaky_relu(d.gn(d.c2(h)), 0.2f);
        out.push_back(d.out(h));
        in = avg_pool2d(in, 2);
    }
    return out;
}

CodeGrid CodecModel::codes_from_spectrogram(const dsp::MelSpectrogram& m) const {
    validate_input(m);
    auto x = nn::constant(normalize_batch({&m}));
    auto rows = encode_rows(x);
    const auto ids = nearest_codes(rows->value, codebook_->value);
    CodeGrid g;
    g.grid_t = cfg_.grid_t;
    g.grid_f = cfg_.grid_f;
    g.indices = ids;
    return g;
}

std::vector<dsp::MelSpectrogram> CodecModel::spectrograms_from_codes(
    const std::vector<CodeGrid>& grids) const {
    const int N = static_cast<int>(grids.size());
    require(N > 0, "codec: empty code batch");
    const int cells = cfg_.grid_t * cfg_.grid_f;
    nn::NdArray rows({N * cells, cfg_.embed_dim});
    for (int n = 0; n < N; ++n) {
        const auto& g = grids[static_cast<size_t>(n)];
        require(g.grid_t == cfg_.grid_t && g.grid_f == cfg_.grid_f, "codec: grid shape mismatch");
        for (int i = 0; i < cells; ++i) {
            const int id = g.indices[static_cast<size_t>(i)];
            require(id >= 0 && id < cfg_.codebook_size, "codec: code index out of range");
            std::copy_n(&codebook_->value[static_cast<int64_t>(id) * cfg_.embed_dim], cfg_.embed_dim,
                        &rows[(static_cast<int64_t>(n) * cells + i) * cfg_.embed_dim]);
        }
    }
    auto out = decode_rows(nn::constant(std::move(rows)), N);

    std::vector<dsp::MelSpectrogram> specs(static_cast<size_t>(N));
    const int64_t plane = static_cast<int64_t>(cfg_.in_frames) * cfg_.in_mels;
    for (int n = 0; n < N; ++n) {
        auto& m = specs[static_cast<size_t>(n)];
        m.num_frames = cfg_.in_frames;
        m.num_mels = cfg_.in_mels;
        m.num_fft = dsp::kDefaultNumFft;
        m.hop_length = dsp::kDefaultHop;
        m.sample_rate = dsp::kDefaultSampleRate;
        m.values.resize(static_cast<size_t>(plane));
        for (int64_t i = 0; i < plane; ++i)
            m.values[static_cast<size_t>(i)] = denormalize_value(out->value[static_cast<int64_t>(n) * plane + i]);
    }
    return specs;
}

dsp::MelSpectrogram CodecModel::spectrogram_from_codes(const CodeGrid& g) const {
    return spectrograms_from_codes({g})[0];
}

void CodecModel::save(const std::string& path, nlohmann::json extra_meta) const {
    nn::Checkpoint ck;
    ck.meta = std::move(extra_meta);
    ck.meta["kind"] = "codec";
    ck.meta["config"] = cfg_.to_json();
    ck.put_store(params_);
    for (const auto& [k, v] : disc_params_.params) ck.tensors["D." + k] = v->value;
    ck.save(path);
}

CodecModel CodecModel::load(const std::string& path) {
    auto ck = nn::Checkpoint::load(path);
    if (ck.meta.value("kind", "") != "codec")
        throw std::runtime_error("codec load: checkpoint kind mismatch in " + path);
    CodecModel model(CodecConfig::from_json(ck.meta.at("config")), 0);
    ck.load_into(model.params_);
    for (auto& [k, v] : model.disc_params_.params) {
        auto it = ck.tensors.find("D." + k);
        if (it == ck.tensors.end()) throw std::runtime_error("codec load: missing tensor D." + k);
        require(it->second.shape == v->value.shape, "codec load: shape mismatch for D." + k);
        v->value = it->second;
    }
    return model;
}

}  // namespace condfoley::codec
