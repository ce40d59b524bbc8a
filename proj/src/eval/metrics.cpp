// SPDX-License-Identifier: Apache-2.0
#include "condfoley/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace condfoley::eval {

namespace {

// Kuhn augmenting-path matching on the detection/reference window graph,
// restricted to the first `n_det` detections (confidence-ranked globally).
struct ClipMatcher {
    std::vector<std::vector<int>> adj;  // detection -> feasible references
    std::vector<int> ref_owner;         // reference -> detection or -1
    std::vector<int> det_match;         // detection -> reference or -1

    explicit ClipMatcher(size_t n_refs) : ref_owner(n_refs, -1) {}

    bool try_augment(int det, std::vector<char>& visited) {
        for (int ref : adj[static_cast<size_t>(det)]) {
            if (visited[static_cast<size_t>(ref)]) continue;
            visited[static_cast<size_t>(ref)] = 1;
            if (ref_owner[static_cast<size_t>(ref)] < 0 ||
                try_augment(ref_owner[static_cast<size_t>(ref)], visited)) {
                ref_owner[static_cast<size_t>(ref)] = det;
                det_match[static_cast<size_t>(det)] = ref;
                return true;
            }
        }
        return false;
    }

    // add one detection; returns true if the maximum matching grew
    bool add_detection(std::vector<int> feasible) {
        adj.push_back(std::move(feasible));
        det_match.push_back(-1);
        std::vector<char> visited(ref_owner.size(), 0);
        return try_augment(static_cast<int>(adj.size()) - 1, visited);
    }
};

}  // namespace

double onset_ap(const std::vector<OnsetInstance>& instances, double window) {
    const double tol = window / 2.0;
    struct Det {
        double conf;
        int clip;
        int idx;
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

    std::vector<ClipMatcher> matchers;
    matchers.reserve(instances.size());
    for (const auto& inst : instances) matchers.emplace_back(inst.ref_times.size());

    double ap = 0.0;
    int64_t tp = 0;
    for (size_t k = 0; k < dets.size(); ++k) {
        const auto& d = dets[k];
        const auto& inst = instances[static_cast<size_t>(d.clip)];
        std::vector<int> feasible;
        for (size_t r = 0; r < inst.ref_times.size(); ++r)
            if (std::abs(inst.det_times[static_cast<size_t>(d.idx)] - inst.ref_times[r]) <= tol)
                feasible.push_back(static_cast<int>(r));
        if (matchers[static_cast<size_t>(d.clip)].add_detection(std::move(feasible))) {
            ++tp;
            ap += static_cast<double>(tp) / static_cast<double>(k + 1);
        }
    }
    return ap / static_cast<double>(n_ref);
}

double onset_count_accuracy(const std::vector<int>& generated_counts,
                            const std::vector<int>& reference_counts) {
    require(generated_counts.size() == reference_counts.size() && !generated_counts.empty(),
            "onset_count_accuracy: size mismatch");
    int hit = 0;
    for (size_t i = 0; i < generated_counts.size(); ++i)
        hit += generated_counts[i] == reference_counts[i];
    return static_cast<double>(hit) / static_cast<double>(generated_counts.size());
}

EvalReport evaluate_generation(const EvalInputs& in) {
    require(in.generated && in.pairs && in.generated->size() == in.pairs->size() &&
                !in.pairs->empty(),
            "evaluate_generation: inputs misaligned");
    require(in.material_clf && in.action_clf, "evaluate_generation: classifiers missing");

    EvalReport report;
    report.n_pairs = static_cast<int>(in.pairs->size());

    std::vector<OnsetInstance> instances;
    std::vector<int> gen_counts, ref_counts;

    for (size_t i = 0; i < in.pairs->size(); ++i) {
        const auto& pair = (*in.pairs)[i];
        const auto& gen = (*in.generated)[i];
        PairRow row;
        row.input_id = pair.input_id;
        row.cond_id = pair.cond_id;

        const auto gen_mel = dsp::compute_mel_spectrogram(gen, in.mel_cfg);
        row.pred_material = in.material_clf->predict(gen_mel);
        row.pred_action = in.action_clf->predict(gen_mel);
        row.cond_material_pred =
            in.material_clf->predict(dsp::compute_mel_spectrogram(pair.cond_audio, in.mel_cfg));
        row.input_action_pred =
            in.action_clf->predict(dsp::compute_mel_spectrogram(pair.input_audio, in.mel_cfg));
        row.material_hit = row.pred_material == row.cond_material_pred;
        row.action_hit = row.pred_action == row.input_action_pred;
        row.material_matched_pair = pair.has_labels && pair.input_material == pair.cond_material;
        row.action_matched_pair = pair.has_labels && pair.input_action == pair.cond_action;

        const auto onsets = dsp::detect_onsets(gen, in.onset_cfg);
        OnsetInstance inst;
        inst.det_times = onsets.times;
        inst.det_conf = onsets.confidences;
        inst.ref_times = pair.input_impact_times;
        row.gen_onsets = static_cast<int>(onsets.size());
        row.ref_onsets = static_cast<int>(pair.input_impact_times.size());
        row.onset_count_hit = row.gen_onsets == row.ref_onsets;
        gen_counts.push_back(row.gen_onsets);
        ref_counts.push_back(row.ref_onsets);
        instances.push_back(std::move(inst));
        report.rows.push_back(std::move(row));
    }

    auto fill_breakdown = [&](TimbreBreakdown& b, auto hit_of, auto matched_of) {
        int hit_all = 0, hit_m = 0, hit_mm = 0;
        for (const auto& row : report.rows) {
            const bool hit = hit_of(row);
            hit_all += hit;
            if (matched_of(row)) {
                ++b.n_matched;
                hit_m += hit;
            } else {
                ++b.n_mismatched;
                hit_mm += hit;
            }
        }
        b.overall = static_cast<double>(hit_all) / report.n_pairs;
        b.matched = b.n_matched ? static_cast<double>(hit_m) / b.n_matched : 0.0;
        b.mismatched = b.n_mismatched ? static_cast<double>(hit_mm) / b.n_mismatched : 0.0;
    };
    fill_breakdown(report.material, [](const PairRow& r) { return r.material_hit; },
                   [](const PairRow& r) { return r.material_matched_pair; });
    fill_breakdown(report.action, [](const PairRow& r) { return r.action_hit; },
                   [](const PairRow& r) { return r.action_matched_pair; });

    report.onset_count_acc = onset_count_accuracy(gen_counts, ref_counts);
    double ap_sum = 0.0;
    for (double w : in.ap_windows) {
        const double ap = onset_ap(instances, w);
        report.onset_ap[w] = ap;
        ap_sum += ap;
    }
    report.avg_ap = in.ap_windows.empty() ? 0.0 : ap_sum / static_cast<double>(in.ap_windows.size());
    return report;
}

}  // namespace condfoley::eval
