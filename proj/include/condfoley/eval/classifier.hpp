// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/dsp/mel.hpp"
#include "condfoley/nn/adam.hpp"
#include "condfoley/nn/checkpoint.hpp"

namespace condfoley::eval {

enum class ClassifierTarget { kMaterial, kAction };

struct ClassifierConfig {
    int classes = 8;
    int in_frames = 192;
    int in_mels = 80;
    std::vector<int> channels = {16, 32, 64, 96};
    int gn_groups = 8;
    float norm_offset = -11.512925f;
    float norm_scale = 10.0f;

    nlohmann::json to_json() const {
        return {{"classes", classes},   {"in_frames", in_frames}, {"in_mels", in_mels},
                {"channels", channels}, {"gn_groups", gn_groups}, {"norm_offset", norm_offset},
                {"norm_scale", norm_scale}};
    }
    static ClassifierConfig from_json(const nlohmann::json& j) {
        ClassifierConfig c;
        c.classes = j.at("classes");
        c.in_frames = j.at("in_frames");
        c.in_mels = j.at("in_mels");
        c.channels = j.at("channels").get<std::vector<int>>();
        c.gn_groups = j.at("gn_groups");
        c.norm_offset = j.at("norm_offset");
        c.norm_scale = j.at("norm_scale");
        return c;
    }
};

// Small mel-input conv classifier; also serves as the codec's optional
// perceptual feature extractor via per-stage maps.
class AudioClassifier {
public:
    AudioClassifier(const ClassifierConfig& cfg, uint64_t seed);

    const ClassifierConfig& config() const { return cfg_; }
    nn::ParamStore& params() { return params_; }

    nn::NdArray normalize_batch(const std::vector<const dsp::MelSpectrogram*>& clips) const;
    nn::Tensor logits(const nn::Tensor& x) const;  // [N, classes]
    // per-stage feature maps, shallowest first (for the perceptual loss)
    std::vector<nn::Tensor> features(const nn::Tensor& x) const;

    int predict(const dsp::MelSpectrogram& m) const;

    void save(const std::string& path, nlohmann::json extra = {}) const;
    static AudioClassifier load(const std::string& path);

private:
    ClassifierConfig cfg_;
    nn::ParamStore params_;
    std::vector<nn::Conv2dLayer> convs_;
    std::vector<nn::GroupNormLayer> gns_;
    nn::Linear head_;
};

struct LabeledClip {
    dsp::MelSpectrogram mel;
    int label = 0;
};

struct ClassifierTrainConfig {
    int steps = 1500;
    int batch = 16;
    float lr = 1e-4f;  // Adam, matching the sound-classifier schedule
    uint64_t seed = 0;
    float grad_clip = 5.0f;
    double target_val_acc = 0.0;  // early stop (0 = off)
    int eval_every = 50;
    bool verbose = false;
};

struct ClassifierTrainResult {
    std::vector<float> loss_trace;
    float val_accuracy = -1.0f;
    int steps_run = 0;
};

ClassifierTrainResult train_audio_classifier(AudioClassifier& clf,
                                             const std::vector<LabeledClip>& train,
                                             const std::vector<LabeledClip>& val,
                                             const ClassifierTrainConfig& tc);

float classifier_accuracy(const AudioClassifier& clf, const std::vector<LabeledClip>& clips);

}  // namespace condfoley::eval
