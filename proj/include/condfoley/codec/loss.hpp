// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>

#include "condfoley/nn/ops.hpp"

namespace condfoley::codec {

struct CodecLossConfig {
    int perceptual_layers = 5;
    float discriminator_weight = 0.1f;
    float perceptual_weight = 0.0f;       // feature net is optional at desk scale
    float codebook_commit_weight = 1.0f;  // both codebook terms carry unit weight by default
};

struct CodecLossResult {
    nn::Tensor total;
    std::map<std::string, float> components;  // post-weighting; sums to total
};

// Composite codec objective: L2 reconstruction + codebook terms with
// stop-gradients + per-layer perceptual distances + the patch adversarial
// term log D(S) + log(1 - D(S_hat)). The same expression serves both sides
// of the GAN: the autoencoder descends it, the discriminator ascends the
// adversarial component. Throws if any component goes non-finite.
CodecLossResult codec_loss(
    const nn::Tensor& S, const nn::Tensor& S_hat, const nn::Tensor& z_hat_rows,
    const nn::Tensor& z_rows,
    const std::vector<std::pair<nn::Tensor, nn::Tensor>>& features,     // (real, recon) per layer
    const std::vector<std::pair<nn::Tensor, nn::Tensor>>& disc_logits,  // (real, fake) per scale
    const CodecLossConfig& cfg);

}  // namespace condfoley::codec
