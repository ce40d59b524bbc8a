// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "condfoley/data/synth.hpp"
#include "condfoley/data/pairs.hpp"
#include "condfoley/eval/report.hpp"

using namespace condfoley;
using namespace condfoley::eval;

namespace {

// independent AP oracle: exhaustive max matching by recursion over detections
int brute_max_matching(const OnsetInstance& inst, const std::vector<int>& det_subset, double tol,
                       size_t k, std::vector<char>& ref_used) {
    if (k == det_subset.size()) return 0;
    const int d = det_subset[k];
    int best = brute_max_matching(inst, det_subset, tol, k + 1, ref_used);  // skip detection d
    for (size_t r = 0; r < inst.ref_times.size(); ++r) {
        if (ref_used[r]) continue;
        if (std::abs(inst.det_times[static_cast<size_t>(d)] - inst.ref_times[r]) > tol) continue;
        ref_used[r] = 1;
        best = std::max(best, 1 + brute_max_matching(inst, det_subset, tol, k + 1, ref_used));
        ref_used[r] = 0;
    }
    return best;
}

double brute_force_ap(const std::vector<OnsetInstance>& instances, double window) {
    const double tol = window / 2.0;
    struct Det {
        double conf;
        int clip, idx;
    };
    std::vector<Det> dets;
    int64_t n_ref = 0;
    for (size_t c = 0; c < instances.size(); ++c) {
        n_ref += static_cast<int64_t>(instances[c].ref_times.size());
        for (size_t i = 0; i < instances[c].det_times.size(); ++i)
            dets.push_back({instances[c].det_conf[i], static_cast<int>(c), static_cast<int>(i)});
    }
    if (n_ref == 0) return 0.0;
    std::stable_sort(dets.begin(), dets.end(), [](const Det& a, const Det& b) {
        if (a.conf != b.conf) return a.conf > b.conf;
        return a.clip != b.clip ? a.clip < b.clip : a.idx < b.idx;
    });

    // TP at rank k = growth of the per-clip exhaustive max matching
    std::vector<std::vector<int>> subsets(instances.size());
    double ap = 0.0;
    int64_t tp = 0;
    std::vector<int> prev_matching(instances.size(), 0);
    for (size_t k = 0; k < dets.size(); ++k) {
        const auto& d = dets[k];
        subsets[static_cast<size_t>(d.clip)].push_back(d.idx);
        std::vector<char> used(instances[static_cast<size_t>(d.clip)].ref_times.size(), 0);
        const int m = brute_max_matching(instances[static_cast<size_t>(d.clip)],
                                         subsets[static_cast<size_t>(d.clip)], tol, 0, used);
        if (m > prev_matching[static_cast<size_t>(d.clip)]) {
            prev_matching[static_cast<size_t>(d.clip)] = m;
            ++tp;
            ap += static_cast<double>(tp) / static_cast<double>(k + 1);
        }
    }
    return ap / static_cast<double>(n_ref);
}

dsp::MelSpectrogram tone_mel(double freq, float amp = 0.5f) {
    dsp::Waveform w;
    w.sample_rate = 22050;
    w.samples.resize(44100);
    for (size_t i = 0; i < w.samples.size(); ++i)
        w.samples[i] = amp * static_cast<float>(std::sin(2 * M_PI * freq * i / 22050.0));
    return dsp::compute_mel_spectrogram(w, dsp::MelConfig{});
}

}  // namespace

TEST_CASE("onset AP: perfect detections score 1 at every window") {
    std::vector<OnsetInstance> instances;
    Rng rng(3);
    for (int c = 0; c < 5; ++c) {
        OnsetInstance inst;
        for (int i = 0; i < 3; ++i) inst.ref_times.push_back(0.3 + 0.5 * i + 0.02 * rng.uniform());
        inst.det_times = inst.ref_times;
        inst.det_conf.assign(3, 0.5 + 0.1 * c);
        instances.push_back(std::move(inst));
    }
    for (double w : {0.10, 0.15, 0.20, 0.25}) CHECK(onset_ap(instances, w) == doctest::Approx(1.0));
}

TEST_CASE("onset AP equals the brute-force assignment oracle; monotone in window") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<OnsetInstance> instances;
        const int clips = rng.uniform_int(1, 3);
        for (int c = 0; c < clips; ++c) {
            OnsetInstance inst;
            const int n_ref = rng.uniform_int(0, 6);
            const int n_det = rng.uniform_int(0, 6);
            for (int i = 0; i < n_ref; ++i) inst.ref_times.push_back(rng.uniform(0.0, 2.0));
            for (int i = 0; i < n_det; ++i) {
                inst.det_times.push_back(rng.uniform(0.0, 2.0));
                inst.det_conf.push_back(rng.uniform(0.0, 1.0));
            }
            instances.push_back(std::move(inst));
        }
        double prev = -1.0;
        for (double w : {0.10, 0.15, 0.20, 0.25}) {
            const double mine = onset_ap(instances, w);
            const double oracle = brute_force_ap(instances, w);
            CHECK(mine == doctest::Approx(oracle).epsilon(1e-12));
            CHECK(mine + 1e-12 >= prev);
            prev = mine;
        }
    }
}

TEST_CASE("onset AP hand case: near-miss at the 0.1 s window") {
    // refs at 1.0 and 1.5; detections: exact hit (conf .9), 0.07 s off (conf .8),
    // spurious far detection (conf .7). tolerance = window/2 = 0.05 rejects the
    // 0.07 s detection.
    OnsetInstance inst;
    inst.ref_times = {1.0, 1.5};
    inst.det_times = {1.0, 1.57, 0.3};
    inst.det_conf = {0.9, 0.8, 0.7};
    const double ap = onset_ap({inst}, 0.10);
    CHECK(ap == doctest::Approx(brute_force_ap({inst}, 0.10)).epsilon(1e-12));
    CHECK(ap == doctest::Approx(0.5));  // only the exact hit counts: P=1 at rank 1, recall 1/2

    // widening to 0.15 (tol 0.075) admits the second detection
    const double ap2 = onset_ap({inst}, 0.15);
    CHECK(ap2 == doctest::Approx(brute_force_ap({inst}, 0.15)).epsilon(1e-12));
    CHECK(ap2 == doctest::Approx(1.0));

    // empty references with detections contribute zero
    OnsetInstance empty_ref;
    empty_ref.det_times = {0.5};
    empty_ref.det_conf = {1.0};
    CHECK(onset_ap({empty_ref}, 0.1) == 0.0);
}

TEST_CASE("onset count accuracy definitional cases") {
    CHECK(onset_count_accuracy({2, 3, 1}, {2, 3, 1}) == 1.0);
    CHECK(onset_count_accuracy({3}, {2}) == 0.0);
    CHECK(onset_count_accuracy({2, 9}, {2, 2}) == 0.5);
}

TEST_CASE("timbre accuracy copy cases via classifier self-consistency") {
    ClassifierConfig ccfg;
    ccfg.classes = 4;
    ccfg.channels = {8, 12, 16, 24};
    AudioClassifier material_clf(ccfg, 5);
    ClassifierConfig acfg = ccfg;
    acfg.classes = 2;
    AudioClassifier action_clf(acfg, 6);

    std::string root = "test_eval_corpus";
    std::filesystem::remove_all(root);
    data::SynthConfig scfg;
    scfg.materials = 2;
    scfg.num_videos = 2;
    scfg.seed = 8;
    scfg.fixed_duration = 4.5;
    auto m = data::synth_generate_dataset(scfg, root);
    Rng rng(4);
    std::vector<data::ClipPair> pairs;
    pairs.push_back(data::sample_clip_pair(m, m.records[0], rng));
    pairs.push_back(data::sample_clip_pair(m, m.records[1], rng));

    // generated := conditional audio verbatim -> material hit on every pair
    std::vector<dsp::Waveform> copies = {pairs[0].cond_audio, pairs[1].cond_audio};
    EvalInputs in;
    in.generated = &copies;
    in.pairs = &pairs;
    in.material_clf = &material_clf;
    in.action_clf = &action_clf;
    auto report = evaluate_generation(in);
    CHECK(report.material.overall == 1.0);

    // generated := the held-out input audio -> action hit on every pair
    std::vector<dsp::Waveform> oracle = {pairs[0].input_audio, pairs[1].input_audio};
    in.generated = &oracle;
    auto report2 = evaluate_generation(in);
    CHECK(report2.action.overall == 1.0);

    // overall equals the weighted mean of matched/mismatched strata
    auto check_weighted = [&](const TimbreBreakdown& b, int n) {
        const double lhs = b.overall * n;
        const double rhs = b.matched * b.n_matched + b.mismatched * b.n_mismatched;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    };
    check_weighted(report.material, report.n_pairs);
    check_weighted(report2.action, report2.n_pairs);

    // reports serialize losslessly
    save_report(report, "test_report.json", "test_report.csv");
    auto loaded = load_report("test_report.json");
    CHECK(report_to_json(loaded) == report_to_json(report));
    std::remove("test_report.json");
    std::remove("test_report.csv");
    std::filesystem::remove_all(root);
}

TEST_CASE("audio classifier separates tone classes") {
    ClassifierConfig cfg;
    cfg.classes = 2;
    cfg.channels = {8, 12, 16, 24};
    AudioClassifier clf(cfg, 11);

    std::vector<LabeledClip> train, val;
    Rng rng(13);
    for (int i = 0; i < 10; ++i) {
        const int label = i % 2;
        const double freq = label == 0 ? 440.0 : 880.0;
        LabeledClip c;
        c.mel = tone_mel(freq * (1.0 + 0.01 * rng.uniform()), 0.4f + 0.2f * rng.uniformf());
        c.label = label;
        (i < 8 ? train : val).push_back(std::move(c));
    }
    ClassifierTrainConfig tc;
    tc.steps = 120;
    tc.batch = 4;
    tc.lr = 2e-3f;
    tc.seed = 2;
    tc.target_val_acc = 1.0;
    tc.eval_every = 20;
    auto r = train_audio_classifier(clf, train, val, tc);
    CHECK(r.val_accuracy >= 0.99f);

    // empty dataset guard + checkpoint round trip
    CHECK_THROWS(train_audio_classifier(clf, {}, {}, tc));
    clf.save("test_clf.ckpt");
    auto loaded = AudioClassifier::load("test_clf.ckpt");
    CHECK(loaded.predict(val[0].mel) == clf.predict(val[0].mel));
    std::remove("test_clf.ckpt");
}
