// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>

#include "condfoley/data/types.hpp"
#include "condfoley/dsp/onsets.hpp"
#include "condfoley/eval/classifier.hpp"

namespace condfoley::eval {

struct PairRow {
    std::string input_id, cond_id;
    int pred_material = -1, cond_material_pred = -1;
    int pred_action = -1, input_action_pred = -1;
    bool material_hit = false, action_hit = false;
    bool material_matched_pair = false, action_matched_pair = false;  // ground-truth strata
    int ref_onsets = 0, gen_onsets = 0;
    bool onset_count_hit = false;
};

struct TimbreBreakdown {
    double overall = 0.0, matched = 0.0, mismatched = 0.0;
    int n_matched = 0, n_mismatched = 0;
};

struct EvalInputs {
    // one generated waveform per evaluation pair, aligned with `pairs`
    const std::vector<dsp::Waveform>* generated = nullptr;
    const std::vector<data::ClipPair>* pairs = nullptr;
    const AudioClassifier* material_clf = nullptr;
    const AudioClassifier* action_clf = nullptr;
    dsp::MelConfig mel_cfg;
    dsp::OnsetConfig onset_cfg;
    std::vector<double> ap_windows = {0.10, 0.15, 0.20, 0.25};
};

struct EvalReport {
    TimbreBreakdown material, action;
    double onset_count_acc = 0.0;
    std::map<double, double> onset_ap;  // window size -> AP
    double avg_ap = 0.0;
    int n_pairs = 0;
    std::vector<PairRow> rows;
};

// material judged against the conditional example's predicted class, action
// against the input's held-out audio prediction
EvalReport evaluate_generation(const EvalInputs& in);

// --- building blocks (also used by tests/oracles) ---

struct OnsetInstance {
    std::vector<double> det_times;
    std::vector<double> det_conf;
    std::vector<double> ref_times;
};

// Confidence-ranked detections matched one-to-one within +/- window/2 via
// incremental maximum bipartite matching; average precision over the pooled
// PR curve.
double onset_ap(const std::vector<OnsetInstance>& instances, double window);

double onset_count_accuracy(const std::vector<int>& generated_counts,
                            const std::vector<int>& reference_counts);

}  // namespace condfoley::eval
