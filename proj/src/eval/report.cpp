// SPDX-License-Identifier: Apache-2.0
#include "condfoley/eval/report.hpp"

#include <fstream>

namespace condfoley::eval {

namespace {
constexpr int kSchemaVersion = 1;
}

nlohmann::ordered_json report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["n_pairs"] = r.n_pairs;
    auto timbre = [](const TimbreBreakdown& b) {
        return nlohmann::ordered_json{{"overall", b.overall},       {"matched", b.matched},
                                      {"mismatched", b.mismatched}, {"n_matched", b.n_matched},
                                      {"n_mismatched", b.n_mismatched}};
    };
    j["material"] = timbre(r.material);
    j["action"] = timbre(r.action);
    j["onset_count_acc"] = r.onset_count_acc;
    auto& ap = j["onset_ap"] = nlohmann::ordered_json::object();
    for (const auto& [w, v] : r.onset_ap) {
        char key[16];
        std::snprintf(key, sizeof(key), "%.2f", w);
        ap[key] = v;
    }
    j["avg_ap"] = r.avg_ap;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows)
        rows.push_back(nlohmann::ordered_json{
            {"input_id", row.input_id},
            {"cond_id", row.cond_id},
            {"pred_material", row.pred_material},
            {"cond_material_pred", row.cond_material_pred},
            {"pred_action", row.pred_action},
            {"input_action_pred", row.input_action_pred},
            {"material_hit", row.material_hit},
            {"action_hit", row.action_hit},
            {"material_matched_pair", row.material_matched_pair},
            {"action_matched_pair", row.action_matched_pair},
            {"ref_onsets", row.ref_onsets},
            {"gen_onsets", row.gen_onsets},
            {"onset_count_hit", row.onset_count_hit}});
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != kSchemaVersion)
        throw std::runtime_error("eval report: unsupported schema version");
    EvalReport r;
    r.n_pairs = j.at("n_pairs");
    auto timbre = [](const nlohmann::json& t) {
        TimbreBreakdown b;
        b.overall = t.at("overall");
        b.matched = t.at("matched");
        b.mismatched = t.at("mismatched");
        b.n_matched = t.at("n_matched");
        b.n_mismatched = t.at("n_mismatched");
        return b;
    };
    r.material = timbre(j.at("material"));
    r.action = timbre(j.at("action"));
    r.onset_count_acc = j.at("onset_count_acc");
    for (const auto& [k, v] : j.at("onset_ap").items()) r.onset_ap[std::stod(k)] = v.get<double>();
    r.avg_ap = j.at("avg_ap");
    for (const auto& rj : j.at("rows")) {
        PairRow row;
        row.input_id = rj.at("input_id");
        row.cond_id = rj.at("cond_id");
        row.pred_material = rj.at("pred_material");
        row.cond_material_pred = rj.at("cond_material_pred");
        row.pred_action = rj.at("pred_action");
        row.input_action_pred = rj.at("input_action_pred");
        row.material_hit = rj.at("material_hit");
        row.action_hit = rj.at("action_hit");
        row.material_matched_pair = rj.at("material_matched_pair");
        row.action_matched_pair = rj.at("action_matched_pair");
        row.ref_onsets = rj.at("ref_onsets");
        row.gen_onsets = rj.at("gen_onsets");
        row.onset_count_hit = rj.at("onset_count_hit");
        r.rows.push_back(std::move(row));
    }
    return r;
}

void save_report(const EvalReport& r, const std::string& json_path, const std::string& csv_path) {
    {
        std::ofstream f(json_path);
        if (!f) throw std::runtime_error("save_report: cannot open " + json_path);
        f << report_to_json(r).dump(2) << "\n";
    }
    if (csv_path.empty()) return;
    std::ofstream f(csv_path);
    if (!f) throw std::runtime_error("save_report: cannot open " + csv_path);
    f << "input_id,cond_id,pred_material,cond_material_pred,pred_action,input_action_pred,"
         "material_hit,action_hit,material_matched_pair,action_matched_pair,ref_onsets,"
         "gen_onsets,onset_count_hit\n";
    for (const auto& row : r.rows)
        f << row.input_id << ',' << row.cond_id << ',' << row.pred_material << ','
          << row.cond_material_pred << ',' << row.pred_action << ',' << row.input_action_pred
          << ',' << row.material_hit << ',' << row.action_hit << ',' << row.material_matched_pair
          << ',' << row.action_matched_pair << ',' << row.ref_onsets << ',' << row.gen_onsets
          << ',' << row.onset_count_hit << "\n";
}

EvalReport load_report(const std::string& json_path) {
    std::ifstream f(json_path);
    if (!f) throw std::runtime_error("load_report: cannot open " + json_path);
    nlohmann::json j;
    f >> j;
    return report_from_json(j);
}

}  // namespace condfoley::eval
