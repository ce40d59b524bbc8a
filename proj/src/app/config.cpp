// SPDX-License-Identifier: Apache-2.0
#include "condfoley/app/config.hpp"

#include <fstream>

namespace condfoley::app {

namespace {

nlohmann::json synth_json(const data::SynthConfig& c) { return c.to_json(); }

data::SynthConfig synth_from(const nlohmann::json& j) {
    data::SynthConfig c;
    c.materials = j.at("materials");
    c.num_videos = j.at("num_videos");
    c.seed = j.at("seed");
    c.min_duration = j.at("min_duration");
    c.max_duration = j.at("max_duration");
    c.fps = j.at("fps");
    c.width = j.at("width");
    c.height = j.at("height");
    c.sample_rate = j.at("sample_rate");
    c.min_event_gap = j.at("min_event_gap");
    c.max_event_gap = j.at("max_event_gap");
    c.hue_jitter = j.at("hue_jitter");
    c.fixed_duration = j.at("fixed_duration");
    c.fixed_events = j.at("fixed_events");
    c.action_mode = j.at("action_mode");
    return c;
}

nlohmann::json codec_train_json(const codec::CodecTrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"lr", c.lr},
            {"lr_min_frac", c.lr_min_frac},
            {"disc_lr", c.disc_lr},
            {"seed", c.seed},
            {"adv_start_frac", c.adv_start_frac},
            {"grad_clip", c.grad_clip},
            {"target_l1", c.target_l1},
            {"eval_every", c.eval_every},
            {"eval_max_clips", c.eval_max_clips},
            {"verbose", c.verbose},
            {"loss",
             {{"perceptual_layers", c.loss.perceptual_layers},
              {"discriminator_weight", c.loss.discriminator_weight},
              {"perceptual_weight", c.loss.perceptual_weight},
              {"codebook_commit_weight", c.loss.codebook_commit_weight}}}};
}

codec::CodecTrainConfig codec_train_from(const nlohmann::json& j) {
    codec::CodecTrainConfig c;
    c.epochs = j.at("epochs");
    c.batch_size = j.at("batch_size");
    c.lr = j.at("lr");
    c.lr_min_frac = j.at("lr_min_frac");
    c.disc_lr = j.at("disc_lr");
    c.seed = j.at("seed");
    c.adv_start_frac = j.at("adv_start_frac");
    c.grad_clip = j.at("grad_clip");
    c.target_l1 = j.at("target_l1");
    c.eval_every = j.at("eval_every");
    c.eval_max_clips = j.at("eval_max_clips");
    c.verbose = j.at("verbose");
    const auto& l = j.at("loss");
    c.loss.perceptual_layers = l.at("perceptual_layers");
    c.loss.discriminator_weight = l.at("discriminator_weight");
    c.loss.perceptual_weight = l.at("perceptual_weight");
    c.loss.codebook_commit_weight = l.at("codebook_commit_weight");
    return c;
}

nlohmann::json gen_train_json(const generator::GenTrainConfig& c) {
    return {{"steps", c.steps},
            {"batch_pairs", c.batch_pairs},
            {"lr", c.lr},
            {"seed", c.seed},
            {"grad_clip", c.grad_clip},
            {"cond_dropout", c.cond_dropout},
            {"augment", c.augment},
            {"aug_freq_mask", c.aug_freq_mask},
            {"aug_time_mask", c.aug_time_mask},
            {"target_accuracy", c.target_accuracy},
            {"eval_every", c.eval_every},
            {"verbose", c.verbose}};
}

generator::GenTrainConfig gen_train_from(const nlohmann::json& j) {
    generator::GenTrainConfig c;
    c.steps = j.at("steps");
    c.batch_pairs = j.at("batch_pairs");
    c.lr = j.at("lr");
    c.seed = j.at("seed");
    c.grad_clip = j.at("grad_clip");
    c.cond_dropout = j.at("cond_dropout");
    c.augment = j.at("augment");
    c.aug_freq_mask = j.at("aug_freq_mask");
    c.aug_time_mask = j.at("aug_time_mask");
    c.target_accuracy = j.at("target_accuracy");
    c.eval_every = j.at("eval_every");
    c.verbose = j.at("verbose");
    return c;
}

nlohmann::json clf_train_json(const eval::ClassifierTrainConfig& c) {
    return {{"steps", c.steps},     {"batch", c.batch},
            {"lr", c.lr},           {"seed", c.seed},
            {"grad_clip", c.grad_clip}, {"target_val_acc", c.target_val_acc},
            {"eval_every", c.eval_every}, {"verbose", c.verbose}};
}

eval::ClassifierTrainConfig clf_train_from(const nlohmann::json& j) {
    eval::ClassifierTrainConfig c;
    c.steps = j.at("steps");
    c.batch = j.at("batch");
    c.lr = j.at("lr");
    c.seed = j.at("seed");
    c.grad_clip = j.at("grad_clip");
    c.target_val_acc = j.at("target_val_acc");
    c.eval_every = j.at("eval_every");
    c.verbose = j.at("verbose");
    return c;
}

nlohmann::json onset_train_json(const baselines::OnsetNetTrainConfig& c) {
    return {{"steps", c.steps},       {"batch_clips", c.batch_clips},
            {"lr", c.lr},             {"seed", c.seed},
            {"grad_clip", c.grad_clip}, {"target_ap", c.target_ap},
            {"eval_every", c.eval_every}, {"verbose", c.verbose}};
}

baselines::OnsetNetTrainConfig onset_train_from(const nlohmann::json& j) {
    baselines::OnsetNetTrainConfig c;
    c.steps = j.at("steps");
    c.batch_clips = j.at("batch_clips");
    c.lr = j.at("lr");
    c.seed = j.at("seed");
    c.grad_clip = j.at("grad_clip");
    c.target_ap = j.at("target_ap");
    c.eval_every = j.at("eval_every");
    c.verbose = j.at("verbose");
    return c;
}

nlohmann::json generation_json(const generator::GenerationParams& p) {
    return {{"temperature", p.temperature},
            {"top_k", p.top_k},
            {"num_candidates", p.num_candidates},
            {"seed", p.seed},
            {"griffin_lim_iters", p.griffin_lim_iters},
            {"nnls_iters", p.nnls_iters},
            {"threads", p.threads}};
}

generator::GenerationParams generation_from(const nlohmann::json& j) {
    generator::GenerationParams p;
    p.temperature = j.at("temperature");
    p.top_k = j.at("top_k");
    p.num_candidates = j.at("num_candidates");
    p.seed = j.at("seed");
    p.griffin_lim_iters = j.at("griffin_lim_iters");
    p.nnls_iters = j.at("nnls_iters");
    p.threads = j.at("threads");
    return p;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["data_root"] = data_root;
    j["synth"] = synth_json(synth);
    j["codec"] = codec.to_json();
    j["codec_train"] = codec_train_json(codec_train);
    j["codec_clips_per_video"] = codec_clips_per_video;
    j["codec_max_videos"] = codec_max_videos;
    j["gen"] = gen.to_json();
    j["cond"] = cond.to_json();
    j["gen_train"] = gen_train_json(gen_train);
    j["clf_train"] = clf_train_json(clf_train);
    j["onset_train"] = onset_train_json(onset_train);
    j["onset_video"] = onset_video.to_json();
    j["onset_clips"] = onset_clips;
    j["generation"] = generation_json(generation);
    j["rerank_tau"] = rerank_tau;
    j["rerank_candidates"] = rerank_candidates;
    j["eval_pairs"] = eval_pairs;
    j["ap_windows"] = ap_windows;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& user) {
    nlohmann::json j = RunConfig{}.to_json();
    j.merge_patch(user);
    RunConfig c;
    c.seed = j.at("seed");
    c.data_root = j.at("data_root");
    c.synth = synth_from(j.at("synth"));
    c.codec = codec::CodecConfig::from_json(j.at("codec"));
    c.codec_train = codec_train_from(j.at("codec_train"));
    c.codec_clips_per_video = j.at("codec_clips_per_video");
    c.codec_max_videos = j.at("codec_max_videos");
    c.gen = generator::GeneratorConfig::from_json(j.at("gen"));
    c.cond = conditioning::ConditioningConfig::from_json(j.at("cond"));
    c.gen_train = gen_train_from(j.at("gen_train"));
    c.clf_train = clf_train_from(j.at("clf_train"));
    c.onset_train = onset_train_from(j.at("onset_train"));
    c.onset_video = conditioning::VideoNetConfig::from_json(j.at("onset_video"));
    c.onset_clips = j.at("onset_clips");
    c.generation = generation_from(j.at("generation"));
    c.rerank_tau = j.at("rerank_tau");
    c.rerank_candidates = j.at("rerank_candidates");
    c.eval_pairs = j.at("eval_pairs");
    c.ap_windows = j.at("ap_windows").get<std::vector<double>>();
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    f >> j;
    return from_json(j);
}

void apply_override(nlohmann::json& doc, const std::string& dotted, const std::string& value) {
    nlohmann::json* node = &doc;
    size_t pos = 0;
    while (true) {
        const size_t dot = dotted.find('.', pos);
        const std::string key = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (dot == std::string::npos) {
            nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

}  // namespace condfoley::app
