// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/app/config.hpp"
#include "condfoley/eval/report.hpp"
#include "condfoley/rerank/rerank.hpp"

namespace condfoley::app {

struct ExperimentResult {
    std::vector<std::pair<std::string, eval::EvalReport>> rows;
    nlohmann::ordered_json table;
};

// Stage-oriented run orchestration under one run directory. Finished stages
// are recorded with config and output checksums, so an interrupted run
// resumes past completed training.
class Pipeline {
public:
    Pipeline(RunConfig cfg, std::string run_dir);

    const RunConfig& config() const { return cfg_; }
    const std::string& run_dir() const { return run_dir_; }

    data::DatasetManifest& ensure_dataset();

    std::string codec_ckpt();        // trains on demand
    std::string classifier_ckpt(eval::ClassifierTarget target);
    std::string onset_ckpt();
    std::string generator_ckpt();

    // The deterministic evaluation pairing: inputs from the test split, each
    // paired with a conditional window from a different test video.
    std::vector<data::ClipPairPlan> eval_pair_plans();

    // One generation row: writes WAVs + a generation manifest, returns paths.
    // Known rows: base, no-cond, random-cond, onset-transfer, rerank.
    std::vector<std::string> generate_row(const std::string& row);
    eval::EvalReport evaluate_row(const std::string& row);

    // train -> generate every row -> evaluate -> comparison table
    ExperimentResult run_all(const std::vector<std::string>& rows = {
                                 "base", "no-cond", "random-cond", "onset-transfer", "rerank"});

private:
    bool stage_fresh(const std::string& stage, const std::string& cfg_hash,
                     const std::vector<std::string>& outputs) const;
    void mark_stage(const std::string& stage, const std::string& cfg_hash,
                    const std::vector<std::string>& outputs);
    void write_run_manifest();

    RunConfig cfg_;
    std::string run_dir_;
    std::optional<data::DatasetManifest> manifest_;
};

nlohmann::ordered_json comparison_table(
    const std::vector<std::pair<std::string, eval::EvalReport>>& rows);

}  // namespace condfoley::app
