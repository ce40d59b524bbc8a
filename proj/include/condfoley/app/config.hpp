// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/baselines/onset_net.hpp"
#include "condfoley/codec/train.hpp"
#include "condfoley/data/synth.hpp"
#include "condfoley/eval/classifier.hpp"
#include "condfoley/generator/generate.hpp"
#include "condfoley/generator/train.hpp"

namespace condfoley::app {

// One JSON document drives a run; flags override dotted paths.
struct RunConfig {
    uint64_t seed = 7;
    std::string data_root = "data";

    data::SynthConfig synth;

    codec::CodecConfig codec;
    codec::CodecTrainConfig codec_train;
    int codec_clips_per_video = 3;
    int codec_max_videos = 80;  // training subset cap for the codec stage

    generator::GeneratorConfig gen;
    conditioning::ConditioningConfig cond;
    generator::GenTrainConfig gen_train;

    eval::ClassifierTrainConfig clf_train;
    baselines::OnsetNetTrainConfig onset_train;
    conditioning::VideoNetConfig onset_video;
    int onset_clips = 64;  // sampled training clips for the onset net

    generator::GenerationParams generation;
    double rerank_tau = 0.2;
    int rerank_candidates = 20;
    int eval_pairs = 64;
    std::vector<double> ap_windows = {0.10, 0.15, 0.20, 0.25};

    nlohmann::json to_json() const;
    // partial documents merge over the defaults
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
};

// dotted-path override, e.g. "gen_train.steps" = "2500"; values parse as JSON
// when possible, else as strings
void apply_override(nlohmann::json& doc, const std::string& dotted, const std::string& value);

}  // namespace condfoley::app
