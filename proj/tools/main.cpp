// SPDX-License-Identifier: Apache-2.0
//
// condfoley — conditional Foley generation at desk scale.
//
// Subcommands: synth, train-codec, train-gen, generate, baseline, evaluate,
// report. Every subcommand reads an optional JSON config plus --set overrides
// and writes its artifacts under a run directory with a manifest.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "condfoley/app/pipeline.hpp"
#include "condfoley/baselines/onset_transfer.hpp"
#include "condfoley/baselines/style_transfer.hpp"
#include "condfoley/data/frames.hpp"
#include "condfoley/dsp/wav.hpp"
#include "condfoley/eval/report.hpp"

namespace fs = std::filesystem;
using namespace condfoley;

namespace {

std::string default_run_root() {
    const char* env = std::getenv("CONDFOLEY_RUNS");
    return env ? env : "runs";
}

app::RunConfig make_config(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw std::runtime_error("cannot open config " + config_path);
        f >> doc;
    }
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got " + kv);
        app::apply_override(doc, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return app::RunConfig::from_json(doc);
}

// clip reference document: {"root": ..., "record": ..., "center": seconds}
struct ClipRef {
    std::string root, record;
    double center = 1.0;
};

ClipRef load_clip_ref(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open clip reference " + path);
    nlohmann::json j;
    f >> j;
    ClipRef ref;
    ref.root = j.at("root");
    ref.record = j.at("record");
    ref.center = j.value("center", 1.0);
    return ref;
}

void print_table(const nlohmann::ordered_json& table) {
    std::printf("%-16s %8s %8s %8s %8s %8s %8s %8s %8s\n", "model", "mat.m", "mat.mm", "mat.all",
                "act.m", "act.mm", "act.all", "#onset", "AP@.10");
    for (const auto& row : table)
        std::printf("%-16s %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f\n",
                    row.at("model").get<std::string>().c_str(),
                    row.at("material_match").get<double>(),
                    row.at("material_mismatch").get<double>(),
                    row.at("material_overall").get<double>(), row.at("action_match").get<double>(),
                    row.at("action_mismatch").get<double>(), row.at("action_overall").get<double>(),
                    row.at("onset_count_acc").get<double>(), row.at("onset_ap_0.10").get<double>());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"conditional Foley generation"};
    cli.require_subcommand(1);

    std::string config_path, run_dir, data_root;
    std::vector<std::string> overrides;
    cli.add_option("--config", config_path, "JSON config document");
    cli.add_option("--set", overrides, "dotted-path config overrides, key=value");

    // synth
    auto* synth = cli.add_subcommand("synth", "generate the procedural corpus");
    int materials = 8, videos = 50;
    uint64_t seed = 7;
    std::string out_dir = "data";
    synth->add_option("--materials", materials);
    synth->add_option("--videos", videos);
    synth->add_option("--seed", seed);
    synth->add_option("--out", out_dir);

    // train-codec / train-gen / report share run options
    auto add_run_opts = [&](CLI::App* cmd) {
        cmd->add_option("--run", run_dir, "run directory (default $CONDFOLEY_RUNS/<cmd>)");
        cmd->add_option("--data", data_root, "dataset root");
    };
    auto* train_codec_cmd = cli.add_subcommand("train-codec", "train the spectrogram codec");
    add_run_opts(train_codec_cmd);
    auto* train_gen_cmd = cli.add_subcommand("train-gen", "train the conditional generator");
    add_run_opts(train_gen_cmd);
    auto* report_cmd = cli.add_subcommand(
        "report", "run the full experiment (train, generate every row, evaluate, compare)");
    add_run_opts(report_cmd);
    std::vector<std::string> report_rows = {"base", "no-cond", "random-cond", "onset-transfer",
                                            "rerank"};
    report_cmd->add_option("--rows", report_rows, "generation rows to include");

    // generate
    auto* gen_cmd = cli.add_subcommand("generate", "generate a soundtrack for one input clip");
    std::string input_ref_path, cond_ref_path, out_wav = "generated.wav";
    int candidates = 1;
    bool do_rerank = false;
    double tau = 0.2;
    bool ablate_no_cond = false;
    add_run_opts(gen_cmd);
    gen_cmd->add_option("--input", input_ref_path, "input clip reference JSON")->required();
    gen_cmd->add_option("--cond", cond_ref_path, "conditional clip reference JSON")->required();
    gen_cmd->add_option("--candidates", candidates);
    gen_cmd->add_flag("--rerank", do_rerank);
    gen_cmd->add_option("--tau", tau);
    gen_cmd->add_flag("--no-cond", ablate_no_cond, "replace conditioning with null tokens");
    gen_cmd->add_option("--out", out_wav);

    // baseline
    auto* baseline_cmd = cli.add_subcommand("baseline", "run a comparison system");
    std::string method = "onset-transfer";
    add_run_opts(baseline_cmd);
    baseline_cmd->add_option("--method", method, "onset-transfer | style-transfer");
    baseline_cmd->add_option("--input", input_ref_path, "input clip reference JSON");
    baseline_cmd->add_option("--cond", cond_ref_path, "conditional clip reference JSON");
    baseline_cmd->add_option("--out", out_wav);

    // evaluate
    auto* eval_cmd = cli.add_subcommand("evaluate", "evaluate generated outputs against a dataset");
    std::string pred_dir, ref_root;
    std::string windows_csv = "0.10,0.15,0.20,0.25";
    add_run_opts(eval_cmd);
    eval_cmd->add_option("--pred", pred_dir, "generation directory (holds generation.json + WAVs)")
        ->required();
    eval_cmd->add_option("--ref", ref_root, "reference dataset root")->required();
    eval_cmd->add_option("--windows", windows_csv, "AP window sweep, comma separated");

    CLI11_PARSE(cli, argc, argv);

    try {
        if (synth->parsed()) {
            auto cfg = make_config(config_path, overrides);
            cfg.synth.materials = materials;
            cfg.synth.num_videos = videos;
            cfg.synth.seed = seed;
            auto manifest = data::synth_generate_dataset(cfg.synth, out_dir);
            std::printf("wrote %zu records under %s\n", manifest.records.size(), out_dir.c_str());
            return 0;
        }

        auto cfg = make_config(config_path, overrides);
        if (!data_root.empty()) cfg.data_root = data_root;

        auto run_for = [&](const std::string& name) {
            return run_dir.empty() ? default_run_root() + "/" + name : run_dir;
        };

        if (train_codec_cmd->parsed()) {
            app::Pipeline pipe(cfg, run_for("codec"));
            std::printf("codec checkpoint: %s\n", pipe.codec_ckpt().c_str());
            return 0;
        }
        if (train_gen_cmd->parsed()) {
            app::Pipeline pipe(cfg, run_for("generator"));
            std::printf("generator checkpoint: %s\n", pipe.generator_ckpt().c_str());
            return 0;
        }
        if (report_cmd->parsed()) {
            app::Pipeline pipe(cfg, run_for("experiment"));
            auto result = pipe.run_all(report_rows);
            print_table(result.table);
            std::printf("reports under %s/reports\n", pipe.run_dir().c_str());
            return 0;
        }
        if (gen_cmd->parsed()) {
            const auto in_ref = load_clip_ref(input_ref_path);
            const auto cond_ref = load_clip_ref(cond_ref_path);
            cfg.data_root = in_ref.root;
            app::Pipeline pipe(cfg, run_for("generate"));
            auto codec_model = codec::CodecModel::load(pipe.codec_ckpt());
            auto gen_model = generator::GeneratorModel::load(pipe.generator_ckpt());

            auto in_manifest = data::load_manifest(in_ref.root);
            auto cond_manifest = cond_ref.root == in_ref.root ? in_manifest
                                                              : data::load_manifest(cond_ref.root);
            data::ClipPairPlan plan{{in_ref.record, in_ref.center},
                                    {cond_ref.record, cond_ref.center}};
            // the conditional may live in a different manifest
            data::ClipPair pair;
            pair.input_video = data::load_clip_video(in_manifest, plan.input, {});
            pair.input_audio = data::load_clip_audio(in_manifest, plan.input, {});
            pair.cond_video = data::load_clip_video(cond_manifest, plan.cond, {});
            pair.cond_audio = data::load_clip_audio(cond_manifest, plan.cond, {});
            pair.input_id = in_ref.record;
            pair.cond_id = cond_ref.record;

            generator::GenerationParams p = cfg.generation;
            p.drop_conditioning = ablate_no_cond;
            dsp::Waveform out;
            nlohmann::json rerank_report;
            if (do_rerank || candidates > 1) {
                auto cands = generator::generate_candidates(pair, gen_model, codec_model, p,
                                                            std::max(1, candidates));
                rerank::EnvelopeCorrelationScorer scorer;
                auto rr = rerank::rerank_select(cands, pair.input_video, tau, scorer);
                out = cands[static_cast<size_t>(do_rerank ? rr.chosen : 0)];
                auto& cj = rerank_report["candidates"] = nlohmann::json::array();
                for (const auto& e : rr.estimates)
                    cj.push_back({{"offset", e.offset}, {"confidence", e.confidence}});
                rerank_report["survivors"] = rr.survivors;
                rerank_report["chosen"] = rr.chosen;
            } else {
                out = generator::generate_soundtrack(pair, gen_model, codec_model, p);
            }
            dsp::write_wav(out_wav, out);

            nlohmann::json manifest = {{"input", {{"root", in_ref.root}, {"record", in_ref.record}, {"center", in_ref.center}}},
                                       {"cond", {{"root", cond_ref.root}, {"record", cond_ref.record}, {"center", cond_ref.center}}},
                                       {"seed", p.seed},
                                       {"temperature", p.temperature},
                                       {"top_k", p.top_k},
                                       {"output", out_wav}};
            if (!rerank_report.empty()) manifest["rerank"] = rerank_report;
            std::ofstream mf(out_wav + ".json");
            mf << manifest.dump(2) << "\n";
            std::printf("wrote %s\n", out_wav.c_str());
            return 0;
        }
        if (baseline_cmd->parsed()) {
            const auto in_ref = load_clip_ref(input_ref_path);
            const auto cond_ref = load_clip_ref(cond_ref_path);
            cfg.data_root = in_ref.root;
            auto manifest = data::load_manifest(in_ref.root);
            data::ClipPairPlan plan{{in_ref.record, in_ref.center}, {cond_ref.record, cond_ref.center}};
            auto pair = data::load_clip_pair(manifest, plan);
            dsp::Waveform out;
            if (method == "onset-transfer") {
                app::Pipeline pipe(cfg, run_for("baseline"));
                auto net = baselines::OnsetNet::load(pipe.onset_ckpt());
                out = baselines::onset_transfer_generate(pair.input_video, pair.cond_video,
                                                         pair.cond_audio, net, {});
            } else if (method == "style-transfer") {
                // oracle: uses the input's held-out audio as content
                out = baselines::style_transfer_generate(pair.input_audio, pair.cond_audio).waveform;
            } else {
                throw std::runtime_error("unknown baseline method: " + method);
            }
            dsp::write_wav(out_wav, out);
            std::printf("wrote %s (%s)\n", out_wav.c_str(), method.c_str());
            return 0;
        }
        if (eval_cmd->parsed()) {
            cfg.ap_windows.clear();
            for (size_t pos = 0; pos < windows_csv.size();) {
                const size_t comma = windows_csv.find(',', pos);
                cfg.ap_windows.push_back(std::stod(windows_csv.substr(pos, comma - pos)));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            cfg.data_root = ref_root;
            // rebuild the evaluation pairing from the generation manifest
            std::ifstream gm(pred_dir + "/generation.json");
            if (!gm) throw std::runtime_error("evaluate: missing " + pred_dir + "/generation.json");
            nlohmann::json gen_manifest;
            gm >> gen_manifest;
            auto manifest = data::load_manifest(ref_root);
            std::vector<data::ClipPair> pairs;
            std::vector<dsp::Waveform> waves;
            for (const auto& pj : gen_manifest.at("pairs")) {
                data::ClipPairPlan plan{{pj.at("input_id"), pj.at("t_input")},
                                        {pj.at("cond_id"), pj.at("t_cond")}};
                pairs.push_back(data::load_clip_pair(manifest, plan));
                waves.push_back(dsp::read_wav(pj.at("output")));
            }
            app::Pipeline pipe(cfg, run_for("experiment"));
            auto material_clf =
                eval::AudioClassifier::load(pipe.classifier_ckpt(eval::ClassifierTarget::kMaterial));
            auto action_clf =
                eval::AudioClassifier::load(pipe.classifier_ckpt(eval::ClassifierTarget::kAction));
            eval::EvalInputs in;
            in.generated = &waves;
            in.pairs = &pairs;
            in.material_clf = &material_clf;
            in.action_clf = &action_clf;
            in.ap_windows = cfg.ap_windows;
            auto report = eval::evaluate_generation(in);
            const std::string row = gen_manifest.value("row", "pred");
            eval::save_report(report, pred_dir + "/eval.json", pred_dir + "/eval.csv");
            print_table(app::comparison_table({{row, report}}));
            std::printf("report: %s/eval.json\n", pred_dir.c_str());
            return 0;
        }
    } catch (const std::exception& ex) {
        nlohmann::json err = {{"error", ex.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
