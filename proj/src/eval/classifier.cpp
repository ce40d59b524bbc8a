// SPDX-License-Identifier: Apache-2.0
#include "condfoley/eval/classifier.hpp"

#include <cstdio>

#include "condfoley/nn/conv.hpp"

namespace condfoley::eval {

AudioClassifier::AudioClassifier(const ClassifierConfig& cfg, uint64_t seed) : cfg_(cfg) {
    Rng rng(seed);
    auto groups_for = [&](int c) {
        int g = std::min(cfg_.gn_groups, c);
        while (c % g != 0) --g;
        return g;
    };
    int in_c = 1;
    for (size_t i = 0; i < cfg_.channels.size(); ++i) {
        const int out_c = cfg_.channels[i];
        convs_.push_back(nn::Conv2dLayer::create(params_, "clf.conv" + std::to_string(i), in_c,
                                                 out_c, 3, 3, 2, 2, 1, 1, rng));
        gns_.push_back(nn::GroupNormLayer::create(params_, "clf.gn" + std::to_string(i), out_c,
                                                  groups_for(out_c)));
        in_c = out_c;
    }
    head_ = nn::Linear::create(params_, "clf.head", cfg_.channels.back(), cfg_.classes, rng);
}

nn::NdArray AudioClassifier::normalize_batch(
    const std::vector<const dsp::MelSpectrogram*>& clips) const {
    const int N = static_cast<int>(clips.size());
    require(N > 0, "classifier: empty batch");
    nn::NdArray x({N, 1, cfg_.in_frames, cfg_.in_mels});
    for (int n = 0; n < N; ++n) {
        const auto& m = *clips[static_cast<size_t>(n)];
        require(m.num_frames == cfg_.in_frames && m.num_mels == cfg_.in_mels,
                "classifier: spectrogram shape mismatch");
        float* dst = &x[static_cast<int64_t>(n) * cfg_.in_frames * cfg_.in_mels];
        for (size_t i = 0; i < m.values.size(); ++i)
            dst[i] = (m.values[i] - cfg_.norm_offset) / cfg_.norm_scale - 1.0f;
    }
    return x;
}

std::vector<nn::Tensor> AudioClassifier::features(const nn::Tensor& x) const {
    std::vector<nn::Tensor> maps;
    nn::Tensor h = x;
    for (size_t i = 0; i < convs_.size(); ++i) {
        h = silu(gns_[i](convs_[i](h)));
        maps.push_back(h);
    }
    return maps;
}

nn::Tensor AudioClassifier::logits(const nn::Tensor& x) const {
    auto maps = features(x);
    return head_(mean_spatial(maps.back()));
}

int AudioClassifier::predict(const dsp::MelSpectrogram& m) const {
    auto l = logits(nn::constant(normalize_batch({&m})));
    int best = 0;
    for (int k = 1; k < cfg_.classes; ++k)
        if (l->value.at(0, k) > l->value.at(0, best)) best = k;
    return best;
}

void AudioClassifier::save(const std::string& path, nlohmann::json extra) const {
    nn::Checkpoint ck;
    ck.meta = std::move(extra);
    ck.meta["kind"] = "classifier";
    ck.meta["config"] = cfg_.to_json();
    ck.put_store(params_);
    ck.save(path);
}

AudioClassifier AudioClassifier::load(const std::string& path) {
    auto ck = nn::Checkpoint::load(path);
    if (ck.meta.value("kind", "") != "classifier")
        throw std::runtime_error("classifier load: checkpoint kind mismatch in " + path);
    AudioClassifier clf(ClassifierConfig::from_json(ck.meta.at("config")), 0);
    ck.load_into(clf.params_);
    return clf;
}

float classifier_accuracy(const AudioClassifier& clf, const std::vector<LabeledClip>& clips) {
    require(!clips.empty(), "classifier_accuracy: no clips");
    int hit = 0;
    for (const auto& c : clips) hit += clf.predict(c.mel) == c.label;
    return static_cast<float>(hit) / static_cast<float>(clips.size());
}

ClassifierTrainResult train_audio_classifier(AudioClassifier& clf,
                                             const std::vector<LabeledClip>& train,
                                             const std::vector<LabeledClip>& val,
                                             const ClassifierTrainConfig& tc) {
    require(!train.empty(), "train_audio_classifier: empty dataset");
    nn::Adam opt(clf.params().all(), tc.lr);
    Rng rng(tc.seed);
    ClassifierTrainResult result;
    float initial = -1.0f;
    int divergent = 0;
    for (int step = 0; step < tc.steps; ++step) {
        std::vector<const dsp::MelSpectrogram*> batch;
        std::vector<int> labels;
        for (int b = 0; b < tc.batch; ++b) {
            const auto& c = train[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(train.size()) - 1))];
            batch.push_back(&c.mel);
            labels.push_back(c.label);
        }
        opt.zero_grad();
        auto loss = cross_entropy_mean(clf.logits(nn::constant(clf.normalize_batch(batch))), labels);
        const float v = loss->value[0];
        if (!std::isfinite(v)) throw std::runtime_error("train_audio_classifier: NaN loss");
        result.loss_trace.push_back(v);
        if (initial < 0.0f) initial = std::max(v, 1e-6f);
        divergent = v > 10.0f * initial ? divergent + 1 : 0;
        if (divergent >= 50) throw std::runtime_error("train_audio_classifier: divergence");
        nn::backward(loss);
        opt.clip_grad_norm(tc.grad_clip);
        opt.step();
        result.steps_run = step + 1;

        const bool last = step + 1 == tc.steps;
        if (!val.empty() && tc.target_val_acc > 0.0 && ((step + 1) % tc.eval_every == 0 || last)) {
            result.val_accuracy = classifier_accuracy(clf, val);
            if (tc.verbose)
                std::fprintf(stderr, "[clf] step %d loss %.4f val %.4f\n", step + 1, v,
                             result.val_accuracy);
            if (result.val_accuracy >= tc.target_val_acc) break;
        }
    }
    if (!val.empty() && result.val_accuracy < 0.0f) result.val_accuracy = classifier_accuracy(clf, val);
    return result;
}

}  // namespace condfoley::eval
