// SPDX-License-Identifier: Apache-2.0
#include "condfoley/baselines/onset_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace condfoley::baselines {

std::vector<int> onset_frames(const std::vector<double>& times, int frame_rate, int num_frames) {
    std::vector<int> frames;
    for (double t : times) {
        const int f = std::clamp(static_cast<int>(std::lround(t * frame_rate)), 0, num_frames - 1);
        if (frames.empty() || frames.back() != f) frames.push_back(f);
    }
    return frames;
}

std::vector<float> OnsetNet::frame_probs(const data::VideoClip& clip) const {
    auto logits = frame_logits(clip);
    std::vector<float> probs(static_cast<size_t>(clip.num_frames()));
    for (int t = 0; t < clip.num_frames(); ++t)
        probs[static_cast<size_t>(t)] = 1.0f / (1.0f + std::exp(-logits->value[t]));
    return probs;
}

std::vector<double> OnsetNet::detect_video_onsets(const data::VideoClip& clip, float threshold,
                                                  int nms_frames) const {
    const auto probs = frame_probs(clip);
    std::vector<double> out;
    const int T = static_cast<int>(probs.size());
    for (int t = 0; t < T; ++t) {
        if (probs[static_cast<size_t>(t)] < threshold) continue;
        bool is_peak = true;
        for (int u = std::max(0, t - nms_frames); u <= std::min(T - 1, t + nms_frames); ++u)
            if (probs[static_cast<size_t>(u)] > probs[static_cast<size_t>(t)] ||
                (probs[static_cast<size_t>(u)] == probs[static_cast<size_t>(t)] && u < t)) {
                is_peak = false;
                break;
            }
        if (is_peak) out.push_back(static_cast<double>(t) / clip.frame_rate);
    }
    return out;
}

void OnsetNet::save(const std::string& path, nlohmann::json extra) const {
    nn::Checkpoint ck;
    ck.meta = std::move(extra);
    ck.meta["kind"] = "onset_net";
    ck.meta["config"] = vcfg.to_json();
    ck.put_store(params);
    ck.save(path);
}

OnsetNet OnsetNet::load(const std::string& path) {
    auto ck = nn::Checkpoint::load(path);
    if (ck.meta.value("kind", "") != "onset_net")
        throw std::runtime_error("onset_net load: checkpoint kind mismatch in " + path);
    OnsetNet net(conditioning::VideoNetConfig::from_json(ck.meta.at("config")), 0);
    ck.load_into(net.params);
    return net;
}

nn::Tensor onset_clip_loss(const OnsetNet& net, const OnsetClipSample& sample) {
    const int T = sample.clip.num_frames();
    auto logits = net.frame_logits(sample.clip);
    const auto pos = onset_frames(sample.onset_times, sample.clip.frame_rate, T);

    std::vector<float> targets(static_cast<size_t>(T), 0.0f);
    for (int f : pos) targets[static_cast<size_t>(f)] = 1.0f;
    const int n_pos = static_cast<int>(pos.size());
    const int n_neg = T - n_pos;
    std::vector<float> weights(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) {
        if (targets[static_cast<size_t>(t)] > 0.5f)
            weights[static_cast<size_t>(t)] = 1.0f / static_cast<float>(n_pos);
        else
            weights[static_cast<size_t>(t)] = n_neg > 0 ? 1.0f / static_cast<float>(n_neg) : 0.0f;
    }
    return bce_with_logits(logits, targets, weights);
}

OnsetNetTrainResult train_video_onset_net(OnsetNet& net, const std::vector<OnsetClipSample>& clips,
                                          const OnsetNetTrainConfig& tc) {
    require(!clips.empty(), "train_video_onset_net: empty dataset");
    nn::Adam opt(net.params.all(), tc.lr);
    Rng rng(tc.seed);
    OnsetNetTrainResult result;
    float initial = -1.0f;
    int divergent = 0;
    for (int step = 0; step < tc.steps; ++step) {
        opt.zero_grad();
        nn::Tensor total;
        for (int b = 0; b < tc.batch_clips; ++b) {
            const auto& sample = clips[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(clips.size()) - 1))];
            auto loss = onset_clip_loss(net, sample);
            total = total ? nn::add(total, loss) : loss;
        }
        total = nn::scale(total, 1.0f / static_cast<float>(tc.batch_clips));
        const float v = total->value[0];
        if (!std::isfinite(v)) throw std::runtime_error("train_video_onset_net: NaN loss");
        result.loss_trace.push_back(v);
        if (initial < 0.0f) initial = std::max(v, 1e-6f);
        divergent = v > 10.0f * initial ? divergent + 1 : 0;
        if (divergent >= 50) throw std::runtime_error("train_video_onset_net: divergence");

        nn::backward(total);
        opt.clip_grad_norm(tc.grad_clip);
        opt.step();
        result.steps_run = step + 1;

        const bool last = step + 1 == tc.steps;
        if (tc.target_ap > 0.0 && ((step + 1) % tc.eval_every == 0 || last)) {
            result.final_ap = frame_ap(net, clips);
            if (tc.verbose)
                std::fprintf(stderr, "[onset] step %d loss %.4f ap %.4f\n", step + 1, v, result.final_ap);
            if (result.final_ap >= tc.target_ap) break;
        }
    }
    if (result.final_ap < 0.0f) result.final_ap = frame_ap(net, clips);
    return result;
}

float frame_ap(const OnsetNet& net, const std::vector<OnsetClipSample>& clips) {
    struct Det {
        float prob;
        bool positive;
    };
    std::vector<Det> dets;
    int64_t n_pos = 0;
    for (const auto& sample : clips) {
        const auto probs = net.frame_probs(sample.clip);
        const auto pos = onset_frames(sample.onset_times, sample.clip.frame_rate,
                                      sample.clip.num_frames());
        std::vector<bool> is_pos(probs.size(), false);
        for (int f : pos) is_pos[static_cast<size_t>(f)] = true;
        for (size_t t = 0; t < probs.size(); ++t) {
            dets.push_back({probs[t], static_cast<bool>(is_pos[t])});
            n_pos += is_pos[t];
        }
    }
    if (n_pos == 0) return 0.0f;
    std::stable_sort(dets.begin(), dets.end(), [](const Det& a, const Det& b) { return a.prob > b.prob; });
    double ap = 0.0;
    int64_t tp = 0;
    for (size_t k = 0; k < dets.size(); ++k) {
        if (!dets[k].positive) continue;
        ++tp;
        ap += static_cast<double>(tp) / static_cast<double>(k + 1);
    }
    return static_cast<float>(ap / static_cast<double>(n_pos));
}

}  // namespace condfoley::baselines
