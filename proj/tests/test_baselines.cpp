// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "condfoley/baselines/onset_net.hpp"
#include "condfoley/baselines/onset_transfer.hpp"
#include "condfoley/baselines/style_transfer.hpp"
#include "condfoley/data/synth.hpp"
#include "condfoley/data/frames.hpp"
#include "condfoley/dsp/onsets.hpp"
#include "condfoley/dsp/wav.hpp"

using namespace condfoley;
using namespace condfoley::baselines;

namespace {

conditioning::VideoNetConfig tiny_vcfg() {
    conditioning::VideoNetConfig c;
    c.channels = {8, 12, 16, 24};
    c.feature_dim = 32;
    return c;
}

struct Fixture {
    std::string root = "test_baselines_corpus";
    std::string single_root = "test_baselines_single";
    data::DatasetManifest manifest;
    data::DatasetManifest single_manifest;
    std::vector<OnsetClipSample> clips;        // two events each
    std::vector<OnsetClipSample> single_clips; // one event each

    Fixture() {
        std::filesystem::remove_all(root);
        std::filesystem::remove_all(single_root);
        data::SynthConfig cfg;
        cfg.materials = 2;
        cfg.num_videos = 4;
        cfg.seed = 42;
        cfg.fixed_duration = 2.0;
        cfg.fixed_events = 2;
        cfg.action_mode = 0;  // hits only: crisp bounce motion
        manifest = data::synth_generate_dataset(cfg, root);
        for (const auto& rec : manifest.records) {
            OnsetClipSample s;
            s.clip = data::load_clip_frames(root + "/" + rec.frames_dir, 0, 30, 15);
            s.onset_times = rec.impact_times;
            clips.push_back(std::move(s));
        }
        cfg.num_videos = 2;
        cfg.seed = 91;
        cfg.fixed_events = 1;
        single_manifest = data::synth_generate_dataset(cfg, single_root);
        for (const auto& rec : single_manifest.records) {
            OnsetClipSample s;
            s.clip = data::load_clip_frames(single_root + "/" + rec.frames_dir, 0, 30, 15);
            s.onset_times = rec.impact_times;
            single_clips.push_back(std::move(s));
        }
    }
    ~Fixture() {
        std::filesystem::remove_all(root);
        std::filesystem::remove_all(single_root);
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

OnsetNet& trained_net() {
    static OnsetNet net = [] {
        OnsetNet n(tiny_vcfg(), 7);
        OnsetNetTrainConfig tc;
        tc.steps = 400;
        tc.batch_clips = 4;
        tc.lr = 2e-3f;
        tc.seed = 3;
        tc.target_ap = 0.97;
        tc.eval_every = 25;
        auto all = fixture().clips;
        all.insert(all.end(), fixture().single_clips.begin(), fixture().single_clips.end());
        train_video_onset_net(n, all, tc);
        return n;
    }();
    return net;
}

double spectral_flatness(const dsp::Waveform& w) {
    auto power = dsp::stft_power(w, 1024, 225);
    double log_sum = 0.0, lin_sum = 0.0;
    int64_t n = 0;
    for (float p : power.values) {
        log_sum += std::log(static_cast<double>(p) + 1e-12);
        lin_sum += p;
        ++n;
    }
    return std::exp(log_sum / n) / (lin_sum / n + 1e-300);
}

}  // namespace

TEST_CASE("onset loss: positive weights sum to one, zero-onset clips stay finite") {
    auto& f = fixture();
    OnsetNet net(tiny_vcfg(), 1);

    // hand recomputation from the same logits
    const auto& sample = f.clips[0];
    REQUIRE(sample.onset_times.size() == 2);
    auto logits = net.frame_logits(sample.clip);
    const auto pos = onset_frames(sample.onset_times, 15, 30);
    double expect = 0.0;
    for (int t = 0; t < 30; ++t) {
        const bool is_pos = std::find(pos.begin(), pos.end(), t) != pos.end();
        const double x = logits->value[t];
        const double bce = is_pos ? std::log1p(std::exp(-x)) : x + std::log1p(std::exp(-x));
        expect += bce * (is_pos ? 1.0 / 2.0 : 1.0 / 28.0);
    }
    auto loss = onset_clip_loss(net, sample);
    CHECK(loss->value[0] == doctest::Approx(expect).epsilon(1e-4));

    OnsetClipSample empty = sample;
    empty.onset_times.clear();
    auto neg_loss = onset_clip_loss(net, empty);
    CHECK(std::isfinite(neg_loss->value[0]));
    CHECK(neg_loss->value[0] > 0.0f);
}

TEST_CASE("onset net overfits a small clip set to high frame AP") {
    auto& net = trained_net();
    const float ap = frame_ap(net, fixture().clips);
    CHECK(ap > 0.95f);

    // detections line up with ground-truth frames
    const auto& sample = fixture().clips[0];
    auto det = net.detect_video_onsets(sample.clip);
    REQUIRE(det.size() == sample.onset_times.size());
    for (size_t i = 0; i < det.size(); ++i)
        CHECK(std::abs(det[i] - sample.onset_times[i]) <= 1.0 / 15.0 + 1e-9);
}

TEST_CASE("onset transfer: self-transfer, onset counts, snippet identity") {
    auto& f = fixture();
    auto& net = trained_net();
    auto cond_wav = dsp::read_wav(f.root + "/" + f.manifest.records[0].wav_path);
    auto input_clip = f.clips[1].clip;

    OnsetTransferParams params;
    params.seed = 5;
    auto out = onset_transfer_generate(input_clip, f.clips[0].clip, cond_wav, net, params);
    CHECK(out.samples.size() == 44100);

    // output onsets match the input video's onset count
    auto out_onsets = dsp::detect_onsets(out, dsp::OnsetConfig{});
    CHECK(out_onsets.size() == f.clips[1].onset_times.size());

    // no energy before the first input onset
    const auto first = net.detect_video_onsets(input_clip).front();
    const auto cut = static_cast<size_t>((first - 0.01) * 22050);
    for (size_t i = 0; i < cut; ++i) CHECK(std::abs(out.samples[i]) < 1e-6f);

    // self-transfer: output onsets align with the input's own within a frame
    auto self_out = onset_transfer_generate(f.clips[0].clip, f.clips[0].clip, cond_wav, net, params);
    auto self_onsets = dsp::detect_onsets(self_out, dsp::OnsetConfig{});
    REQUIRE(self_onsets.size() == f.clips[0].onset_times.size());
    for (size_t i = 0; i < self_onsets.size(); ++i)
        CHECK(std::abs(self_onsets.times[i] - f.clips[0].onset_times[i]) <= 1.0 / 15.0 + 0.05);

    // continuous (motionless) conditional: explicit failure
    data::VideoClip still;
    still.frame_rate = 15;
    still.frames = nn::NdArray({30, 3, 112, 112}, 0.3f);
    CHECK_THROWS_WITH_AS(onset_transfer_generate(input_clip, still, cond_wav, net, params),
                         doctest::Contains("no onsets"), std::runtime_error);
}

TEST_CASE("onset transfer: single onset window reproduces the snippet") {
    auto& f = fixture();
    auto& net = trained_net();

    const auto& clip0 = f.single_clips[0].clip;
    const auto& clip1 = f.single_clips[1].clip;
    auto wav1 = dsp::read_wav(f.single_root + "/" + f.single_manifest.records[1].wav_path);

    const auto in_onsets = net.detect_video_onsets(clip0);
    const auto cond_onsets = net.detect_video_onsets(clip1);
    REQUIRE(in_onsets.size() == 1);
    REQUIRE(cond_onsets.size() == 1);

    auto out = onset_transfer_generate(clip0, clip1, wav1, net, {});
    const auto src0 = static_cast<int64_t>(cond_onsets[0] * 22050);
    const auto dst0 = static_cast<int64_t>(in_onsets[0] * 22050);
    const auto len = static_cast<int64_t>(0.5 * 22050);
    for (int64_t i = 0; i < len && dst0 + i < 44100 && src0 + i < 44100; ++i)
        CHECK(out.samples[static_cast<size_t>(dst0 + i)] ==
              doctest::Approx(wav1.samples[static_cast<size_t>(src0 + i)]).epsilon(1e-6));
}

TEST_CASE("style transfer: fixed point, flatness ordering, determinism") {
    // content == style: near-zero loss at initialization, output ~ round trip
    dsp::Waveform tone;
    tone.sample_rate = 22050;
    tone.samples.resize(44100);
    for (size_t i = 0; i < tone.samples.size(); ++i)
        tone.samples[i] = 0.5f * static_cast<float>(std::sin(2 * M_PI * 523.0 * i / 22050.0));

    StyleTransferParams quick;
    quick.iters = 5;
    quick.griffin_lim_iters = 8;
    quick.nnls_iters = 8;
    auto fixed_point = style_transfer_generate(tone, tone, quick);
    CHECK(fixed_point.best_loss_trace.front() < 1e-4f);

    // tone content + noise style: flatness lands strictly between the inputs
    dsp::Waveform noise;
    noise.sample_rate = 22050;
    noise.samples.resize(44100);
    Rng rng(2);
    for (auto& s : noise.samples) s = 0.4f * (rng.uniformf() * 2.0f - 1.0f);

    StyleTransferParams params;
    params.iters = 120;
    params.griffin_lim_iters = 12;
    params.nnls_iters = 10;
    auto styled = style_transfer_generate(tone, noise, params);
    const double f_tone = spectral_flatness(tone);
    const double f_noise = spectral_flatness(noise);
    const double f_out = spectral_flatness(styled.waveform);
    CHECK(f_out > f_tone);
    CHECK(f_out < f_noise);

    // best-so-far trace is non-increasing
    for (size_t i = 1; i < styled.best_loss_trace.size(); ++i)
        CHECK(styled.best_loss_trace[i] <= styled.best_loss_trace[i - 1]);

    auto again = style_transfer_generate(tone, noise, params);
    CHECK(again.waveform.samples == styled.waveform.samples);
}
