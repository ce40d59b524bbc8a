// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "condfoley/data/frames.hpp"
#include "condfoley/data/pairs.hpp"
#include "condfoley/data/synth.hpp"
#include "condfoley/dsp/onsets.hpp"
#include "condfoley/dsp/wav.hpp"

using namespace condfoley;
using namespace condfoley::data;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

SynthConfig small_corpus(uint64_t seed) {
    SynthConfig cfg;
    cfg.materials = 4;
    cfg.num_videos = 8;
    cfg.seed = seed;
    cfg.fixed_duration = 5.0;
    cfg.threads = 2;
    return cfg;
}

struct TempTree {
    std::string root;
    explicit TempTree(std::string r) : root(std::move(r)) { fs::remove_all(root); }
    ~TempTree() { fs::remove_all(root); }
};

}  // namespace

TEST_CASE("png image round trip") {
    Image img;
    img.width = 16;
    img.height = 12;
    img.rgb.resize(16 * 12 * 3);
    Rng rng(4);
    for (auto& b : img.rgb) b = static_cast<uint8_t>(rng.uniform_int(0, 255));
    write_png("test_img.png", img);
    auto back = read_png("test_img.png");
    CHECK(back.width == 16);
    CHECK(back.height == 12);
    CHECK(back.rgb == img.rgb);
    std::remove("test_img.png");
}

TEST_CASE("synthetic corpus: records, labels, uniform materials, reload") {
    TempTree tree("test_synth_a");
    auto m = synth_generate_dataset(small_corpus(7), tree.root);
    REQUIRE(m.records.size() == 8);

    std::map<int, int> material_count;
    for (const auto& r : m.records) {
        CHECK(r.has_labels);
        CHECK(r.duration == doctest::Approx(5.0));
        CHECK(r.frame_count == 75);
        CHECK(!r.impact_times.empty());
        for (double t : r.impact_times) CHECK(std::abs(t * 15.0 - std::round(t * 15.0)) < 1e-9);
        ++material_count[r.material];
    }
    for (const auto& [mat, count] : material_count) CHECK(count == 2);  // round-robin over M=4

    // splits are disjoint by id and cover all records
    CHECK(m.train_ids.size() + m.val_ids.size() + m.test_ids.size() == 8);

    auto reloaded = load_manifest(tree.root);
    CHECK(reloaded.records.size() == m.records.size());
    for (size_t i = 0; i < m.records.size(); ++i) {
        CHECK(reloaded.records[i].id == m.records[i].id);
        CHECK(reloaded.records[i].impact_times == m.records[i].impact_times);
        CHECK(reloaded.records[i].material == m.records[i].material);
    }
}

TEST_CASE("synthetic corpus is bit-deterministic under a fixed seed") {
    TempTree ta("test_synth_b1"), tb("test_synth_b2");
    auto cfg = small_corpus(11);
    cfg.num_videos = 2;
    synth_generate_dataset(cfg, ta.root);
    synth_generate_dataset(cfg, tb.root);
    CHECK(slurp(ta.root + "/vid_0000/audio.wav") == slurp(tb.root + "/vid_0000/audio.wav"));
    CHECK(slurp(ta.root + "/vid_0001/frames/frame_00030.png") ==
          slurp(tb.root + "/vid_0001/frames/frame_00030.png"));
}

TEST_CASE("clean synthetic clips: detected onsets equal the ground-truth count") {
    TempTree tree("test_synth_c");
    auto m = synth_generate_dataset(small_corpus(3), tree.root);
    int match = 0, total = 0;
    for (const auto& r : m.records) {
        auto wav = dsp::read_wav(tree.root + "/" + r.wav_path);
        auto onsets = dsp::detect_onsets(wav, dsp::OnsetConfig{});
        ++total;
        if (onsets.size() == r.impact_times.size()) ++match;
    }
    // the corpus-wide invariant is >= 95% on clean clips; all 8 here are clean
    CHECK(match == total);
}

TEST_CASE("pair plan: determinism, bounds, and the overlap cap") {
    VideoRecord rec;
    rec.id = "r";
    rec.duration = 4.5;
    rec.frame_count = 67;

    Rng a(5), b(5);
    PairConfig pc;
    auto p1 = sample_clip_pair_plan(rec, a, pc);
    auto p2 = sample_clip_pair_plan(rec, b, pc);
    CHECK(p1.input.center == p2.input.center);
    CHECK(p1.cond.center == p2.cond.center);

    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        auto p = sample_clip_pair_plan(rec, rng, pc);
        CHECK(p.input.center >= 1.0);
        CHECK(p.input.center <= 3.5);
        CHECK(p.cond.center >= 1.0);
        CHECK(p.cond.center <= 3.5);
        const double dt = std::abs(p.cond.center - p.input.center);
        CHECK(dt >= pc.min_offset);
        // clips overlap at most 25% of their length
        CHECK(std::max(0.0, pc.clip_length - dt) <= 0.25 * pc.clip_length);
    }

    VideoRecord tiny = rec;
    tiny.duration = 3.9;
    CHECK_THROWS(sample_clip_pair_plan(tiny, rng, pc));

    VideoRecord longrec = rec;
    longrec.duration = 20.0;
    Rng c(9), d(9);
    auto q1 = sample_clip_pair_plan(longrec, c, pc);
    auto q2 = sample_clip_pair_plan(longrec, d, pc);
    CHECK(q1.input.center == q2.input.center);
    CHECK(std::abs(q1.cond.center - q1.input.center) <= pc.max_offset);
}

TEST_CASE("random conditional: crosses sources, roughly uniform") {
    std::vector<VideoRecord> recs(10);
    std::vector<const VideoRecord*> ptrs;
    for (int i = 0; i < 10; ++i) {
        recs[static_cast<size_t>(i)].id = "rec" + std::to_string(i);
        recs[static_cast<size_t>(i)].duration = 10.0;
        ptrs.push_back(&recs[static_cast<size_t>(i)]);
    }
    // singleton guard
    std::vector<const VideoRecord*> single = {ptrs[0]};
    Rng rng(23);
    CHECK_THROWS(sample_random_conditional_plan(single, recs[0], rng, PairConfig{}));

    // 2-record pigeonhole
    std::vector<const VideoRecord*> two = {ptrs[0], ptrs[1]};
    for (int i = 0; i < 20; ++i)
        CHECK(sample_random_conditional_plan(two, recs[0], rng, PairConfig{}).cond.record_id == "rec1");

    // frequency sanity over the other 9
    std::map<std::string, int> hist;
    for (int i = 0; i < 900; ++i)
        ++hist[sample_random_conditional_plan(ptrs, recs[0], rng, PairConfig{}).cond.record_id];
    CHECK(hist.count("rec0") == 0);
    CHECK(hist.size() == 9);
    double chi2 = 0.0;
    for (const auto& [id, n] : hist) chi2 += (n - 100.0) * (n - 100.0) / 100.0;
    CHECK(chi2 < 27.0);  // chi^2_{8, 0.999} ~ 26.1

    Rng e(31), f(31);
    CHECK(sample_random_conditional_plan(ptrs, recs[0], e, PairConfig{}).cond.record_id ==
          sample_random_conditional_plan(ptrs, recs[0], f, PairConfig{}).cond.record_id);
}

TEST_CASE("clip pair materialization: shapes, labels, local impacts") {
    TempTree tree("test_synth_d");
    auto cfg = small_corpus(19);
    cfg.num_videos = 3;
    auto m = synth_generate_dataset(cfg, tree.root);
    Rng rng(2);
    auto pair = sample_clip_pair(m, m.records[0], rng);
    CHECK(pair.input_video.num_frames() == 30);
    CHECK(pair.cond_video.num_frames() == 30);
    CHECK(pair.input_video.frames.shape == std::vector<int>{30, 3, 112, 112});
    CHECK(pair.input_audio.samples.size() == 44100);
    CHECK(pair.cond_audio.samples.size() == 44100);
    CHECK(pair.input_id == pair.cond_id);  // pretext mode stays within the video
    CHECK(pair.has_labels);
    CHECK(pair.input_material == pair.cond_material);
    for (double t : pair.input_impact_times) {
        CHECK(t >= 0.0);
        CHECK(t < 2.0);
    }

    auto rc = sample_random_conditional(m, m.split("train").empty()
                                               ? std::vector<const VideoRecord*>{&m.records[0], &m.records[1], &m.records[2]}
                                               : std::vector<const VideoRecord*>{&m.records[0], &m.records[1], &m.records[2]},
                                        m.records[0], rng);
    CHECK(rc.input_id != rc.cond_id);  // ablation always crosses sources
}

TEST_CASE("manifest guards: schema version and missing media") {
    TempTree tree("test_synth_e");
    auto cfg = small_corpus(29);
    cfg.num_videos = 2;
    auto m = synth_generate_dataset(cfg, tree.root);

    // unknown schema version
    {
        auto j = nlohmann::json::parse(slurp(tree.root + "/manifest.json"));
        j["schema_version"] = 99;
        std::ofstream f(tree.root + "/manifest.json");
        f << j.dump();
    }
    CHECK_THROWS(load_manifest(tree.root));

    // restore, then delete a wav
    synth_generate_dataset(cfg, tree.root);
    fs::remove(tree.root + "/vid_0001/audio.wav");
    CHECK_THROWS_WITH_AS(load_manifest(tree.root), doctest::Contains("vid_0001/audio.wav"),
                         std::runtime_error);
}
