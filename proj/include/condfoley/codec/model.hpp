// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "condfoley/codec/types.hpp"
#include "condfoley/dsp/types.hpp"
#include "condfoley/nn/checkpoint.hpp"
#include "condfoley/nn/layers.hpp"

namespace condfoley::codec {

struct CodecConfig {
    int codebook_size = 128;  // K
    int embed_dim = 256;      // d
    int grid_t = 12;
    int grid_f = 5;
    int in_frames = 192;
    int in_mels = 80;
    std::vector<int> channels = {24, 48, 64, 96};
    int gn_groups = 8;
    // affine map from log-mel into the network's working range
    float norm_offset = -11.512925f;  // log(1e-5)
    float norm_scale = 10.0f;

    nlohmann::json to_json() const;
    static CodecConfig from_json(const nlohmann::json& j);
};

// Spectrogram VQ autoencoder: strided conv encoder to a grid_t x grid_f x d
// latent, nearest-entry quantizer, mirrored upsampling decoder, and a
// two-scale patch discriminator.
class CodecModel {
public:
    CodecModel(const CodecConfig& cfg, uint64_t seed);

    const CodecConfig& config() const { return cfg_; }
    nn::ParamStore& params() { return params_; }
    nn::ParamStore& disc_params() { return disc_params_; }
    nn::Tensor codebook() const { return codebook_; }
    Codebook codebook_snapshot() const { return Codebook{codebook_->value}; }

    // normalization between log-mel values and network range
    float normalize_value(float log_mel) const {
        return (log_mel - cfg_.norm_offset) / cfg_.norm_scale - 1.0f;
    }
    float denormalize_value(float x) const {
        return (x + 1.0f) * cfg_.norm_scale + cfg_.norm_offset;
    }
    // [N,1,T,F] batch from clips; throws on shape mismatch
    nn::NdArray normalize_batch(const std::vector<const dsp::MelSpectrogram*>& clips) const;

    // graph paths (shared by training and inference)
    nn::Tensor encode_rows(const nn::Tensor& x) const;                  // -> [N*gT*gF, d]
    nn::Tensor decode_rows(const nn::Tensor& zq_rows, int batch) const; // -> [N,1,T,F]
    // patch logits at both scales: {D(x), D(avgpool2(x))}
    std::vector<nn::Tensor> discriminate(const nn::Tensor& x) const;

    // inference operations
    CodeGrid codes_from_spectrogram(const dsp::MelSpectrogram& m) const;
    dsp::MelSpectrogram spectrogram_from_codes(const CodeGrid& g) const;
    // decode a batch of grids in one pass
    std::vector<dsp::MelSpectrogram> spectrograms_from_codes(const std::vector<CodeGrid>& grids) const;

    void save(const std::string& path, nlohmann::json extra_meta = {}) const;
    static CodecModel load(const std::string& path);

private:
    void validate_input(const dsp::MelSpectrogram& m) const;

    CodecConfig cfg_;
    nn::ParamStore params_;
    nn::ParamStore disc_params_;
    nn::Tensor codebook_;
    std::vector<nn::Conv2dLayer> enc_;
    std::vector<nn::GroupNormLayer> enc_gn_;
    nn::Conv2dLayer enc_out_;
    nn::Conv2dLayer dec_in_;
    nn::GroupNormLayer dec_in_gn_;
    std::vector<nn::Conv2dLayer> dec_;
    std::vector<nn::GroupNormLayer> dec_gn_;
    nn::Conv2dLayer dec_pre_, dec_out_;
    struct DiscScale {
        nn::Conv2dLayer c1, c2, out;
        nn::GroupNormLayer gn;
    };
    std::vector<DiscScale> disc_;
};

}  // namespace condfoley::codec
