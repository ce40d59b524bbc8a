// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "condfoley/app/pipeline.hpp"
#include "condfoley/app/sha256.hpp"

using namespace condfoley;
using namespace condfoley::app;
namespace fs = std::filesystem;

namespace {

RunConfig smoke_config(const std::string& data_root) {
    nlohmann::json j;
    j["data_root"] = data_root;
    j["seed"] = 11;
    j["synth"] = {{"materials", 2}, {"num_videos", 8}, {"seed", 5}, {"fixed_duration", 5.0}};
    j["codec"] = {{"codebook_size", 32}, {"embed_dim", 32}, {"channels", {8, 12, 16, 24}}};
    j["codec_train"] = {{"epochs", 2}, {"batch_size", 4},
                        {"loss", {{"discriminator_weight", 0.0}}}};
    j["codec_clips_per_video"] = 1;
    j["codec_max_videos"] = 4;
    j["gen"] = {{"layers", 2}, {"heads", 2}, {"model_width", 64}, {"vocab_size", 32}, {"mlp_mult", 2}};
    j["cond"] = {{"model_width", 64}, {"codec_embed_dim", 32},
                 {"video", {{"channels", {8, 12, 16, 24}}, {"feature_dim", 64}}}};
    j["gen_train"] = {{"steps", 4}, {"batch_pairs", 2}};
    j["clf_train"] = {{"steps", 20}, {"batch", 4}};
    j["onset_train"] = {{"steps", 20}, {"batch_clips", 2}};
    j["onset_video"] = {{"channels", {8, 12, 16, 24}}, {"feature_dim", 32}};
    j["onset_clips"] = 6;
    j["generation"] = {{"griffin_lim_iters", 4}, {"nnls_iters", 4}};
    j["eval_pairs"] = 3;
    return RunConfig::from_json(j);
}

}  // namespace

TEST_CASE("config: defaults, merge, and dotted overrides") {
    auto defaults = RunConfig{};
    CHECK(defaults.rerank_tau == 0.2);              // supp-pinned tolerance
    CHECK(defaults.generation.num_candidates == 100);
    CHECK(defaults.codec.grid_t == 12);
    CHECK(defaults.codec.grid_f == 5);
    CHECK(defaults.codec.embed_dim == 256);
    CHECK(defaults.cond.frames_per_clip == 30);
    CHECK(defaults.synth.fps == 15);
    CHECK(defaults.ap_windows == std::vector<double>{0.10, 0.15, 0.20, 0.25});

    nlohmann::json doc = {{"gen_train", {{"steps", 123}}}};
    apply_override(doc, "codec.codebook_size", "64");
    apply_override(doc, "data_root", "elsewhere");
    auto cfg = RunConfig::from_json(doc);
    CHECK(cfg.gen_train.steps == 123);
    CHECK(cfg.codec.codebook_size == 64);
    CHECK(cfg.data_root == "elsewhere");
    CHECK(cfg.gen_train.lr == doctest::Approx(1.6e-4f));  // untouched default
}

TEST_CASE("sha256 matches known vectors") {
    CHECK(sha256_hex(std::string{}) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex(std::string{"abc"}) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("pipeline: smoke run with resume and comparison table") {
    const std::string data_root = "test_app_data";
    const std::string run_dir = "test_app_run";
    fs::remove_all(data_root);
    fs::remove_all(run_dir);

    auto cfg = smoke_config(data_root);
    Pipeline pipe(cfg, run_dir);

    const auto codec_path = pipe.codec_ckpt();
    CHECK(fs::exists(codec_path));
    const auto first_write = fs::last_write_time(codec_path);

    // a fresh pipeline with the same config skips the finished stage
    Pipeline pipe2(cfg, run_dir);
    CHECK(pipe2.codec_ckpt() == codec_path);
    CHECK(fs::last_write_time(codec_path) == first_write);

    auto result = pipe2.run_all({"base", "no-cond"});
    REQUIRE(result.rows.size() == 2);
    CHECK(result.table.size() == 2);
    CHECK(fs::exists(run_dir + "/reports/base.json"));
    CHECK(fs::exists(run_dir + "/reports/base.csv"));
    CHECK(fs::exists(run_dir + "/reports/comparison.json"));
    CHECK(fs::exists(run_dir + "/gen/base/generation.json"));
    CHECK(fs::exists(run_dir + "/gen/base/pair_000.wav"));
    CHECK(fs::exists(run_dir + "/run.json"));
    for (const auto& [name, report] : result.rows) CHECK(report.n_pairs == 3);

    // the generation stage also resumes: outputs untouched on a second call
    const auto wav_time = fs::last_write_time(run_dir + "/gen/base/pair_000.wav");
    pipe2.generate_row("base");
    CHECK(fs::last_write_time(run_dir + "/gen/base/pair_000.wav") == wav_time);

    // changing a config knob invalidates the dependent stage
    auto cfg2 = cfg;
    cfg2.gen_train.steps = 5;
    Pipeline pipe3(cfg2, run_dir);
    const auto gen_path = pipe3.generator_ckpt();
    CHECK(fs::exists(gen_path));

    fs::remove_all(data_root);
    fs::remove_all(run_dir);
}
