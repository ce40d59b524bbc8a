// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/conditioning/sequence.hpp"

namespace condfoley::generator {

struct GeneratorConfig {
    int layers = 4;
    int heads = 4;
    int model_width = 256;
    int context_length = 180;
    int vocab_size = 128;  // K
    int mlp_mult = 4;

    nlohmann::json to_json() const {
        return {{"layers", layers},       {"heads", heads},
                {"model_width", model_width}, {"context_length", context_length},
                {"vocab_size", vocab_size},   {"mlp_mult", mlp_mult}};
    }
    static GeneratorConfig from_json(const nlohmann::json& j) {
        GeneratorConfig c;
        c.layers = j.at("layers");
        c.heads = j.at("heads");
        c.model_width = j.at("model_width");
        c.context_length = j.at("context_length");
        c.vocab_size = j.at("vocab_size");
        c.mlp_mult = j.at("mlp_mult");
        return c;
    }
};

// Decoder-only transformer over the assembled token sequence. Conditioning
// positions attend freely among themselves; OUT_AUDIO positions attend the
// whole prefix plus earlier OUT positions (causal over the code block only).
class Transformer {
public:
    Transformer() = default;
    Transformer(nn::ParamStore& ps, const std::string& prefix, const GeneratorConfig& cfg, Rng& rng);

    const GeneratorConfig& config() const { return cfg_; }

    // Teacher-forcing/graph path: logits for every OUT_AUDIO slot,
    // [n - prefix_len, vocab]. Requires prefix_len < n <= context_length.
    nn::Tensor forward_out_logits(const nn::Tensor& emb, int prefix_len) const;

    struct Block {
        nn::LayerNormLayer ln1;
        nn::Linear wq, wk, wv, wo;
        nn::LayerNormLayer ln2;
        nn::Linear fc1, fc2;
    };
    const std::vector<Block>& blocks() const { return blocks_; }
    const nn::LayerNormLayer& final_ln() const { return ln_f_; }
    const nn::Linear& head() const { return head_; }

private:
    GeneratorConfig cfg_;
    std::vector<Block> blocks_;
    nn::LayerNormLayer ln_f_;
    nn::Linear head_;
};

// Plain-array incremental decoder with a per-layer KV cache. The prefix block
// is appended in one non-causal pass; each later row attends everything
// cached so far. Copyable, so candidates can share one prefix computation.
class InferenceSession {
public:
    explicit InferenceSession(const Transformer& tf);

    // rows [R, width]; the first append is the (non-causal) prefix block
    void append(const nn::NdArray& rows);
    int length() const { return n_cached_; }
    // logits [vocab] of the most recently appended row
    const std::vector<float>& last_logits() const { return logits_; }

private:
    const Transformer* tf_;
    int n_cached_ = 0;
    std::vector<nn::NdArray> kcache_, vcache_;  // per layer [context, width]
    std::vector<float> logits_;
};

}  // namespace condfoley::generator
