// SPDX-License-Identifier: Apache-2.0
#include "condfoley/data/manifest.hpp"

#include <filesystem>
#include <set>
#include <fstream>

namespace condfoley::data {

namespace fs = std::filesystem;

namespace {

nlohmann::json record_to_json(const VideoRecord& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["duration"] = r.duration;
    j["frame_count"] = r.frame_count;
    j["frame_rate"] = r.frame_rate;
    j["frames_dir"] = r.frames_dir;
    j["wav_path"] = r.wav_path;
    if (r.has_labels) {
        j["material"] = r.material;
        j["action"] = action_name(r.action);
        j["impact_times"] = r.impact_times;
    }
    return j;
}

VideoRecord record_from_json(const nlohmann::json& j) {
    VideoRecord r;
    r.id = j.at("id");
    r.duration = j.at("duration");
    r.frame_count = j.at("frame_count");
    r.frame_rate = j.at("frame_rate");
    r.frames_dir = j.at("frames_dir");
    r.wav_path = j.at("wav_path");
    if (j.contains("material")) {
        r.has_labels = true;
        r.material = j.at("material");
        r.action = action_from_name(j.at("action"));
        r.impact_times = j.at("impact_times").get<std::vector<double>>();
    }
    return r;
}

}  // namespace

const VideoRecord& DatasetManifest::record(const std::string& id) const {
    for (const auto& r : records)
        if (r.id == id) return r;
    throw std::runtime_error("manifest: unknown record id " + id);
}

std::vector<const VideoRecord*> DatasetManifest::split(const std::string& name) const {
    const std::vector<std::string>* ids = nullptr;
    if (name == "train") ids = &train_ids;
    else if (name == "val") ids = &val_ids;
    else if (name == "test") ids = &test_ids;
    else throw std::invalid_argument("manifest: unknown split " + name);
    std::vector<const VideoRecord*> out;
    out.reserve(ids->size());
    for (const auto& id : *ids) out.push_back(&record(id));
    return out;
}

void save_manifest(const DatasetManifest& m) {
    nlohmann::json j;
    j["schema_version"] = DatasetManifest::kSchemaVersion;
    j["corpus_params"] = m.corpus_params;
    j["splits"] = {{"train", m.train_ids}, {"val", m.val_ids}, {"test", m.test_ids}};
    auto& recs = j["records"] = nlohmann::json::array();
    for (const auto& r : m.records) recs.push_back(record_to_json(r));

    // atomic write via temp-file rename
    const fs::path final_path = fs::path(m.root) / "manifest.json";
    const fs::path tmp_path = fs::path(m.root) / "manifest.json.tmp";
    {
        std::ofstream f(tmp_path);
        if (!f) throw std::runtime_error("save_manifest: cannot open " + tmp_path.string());
        f << j.dump(2) << "\n";
    }
    fs::rename(tmp_path, final_path);
}

DatasetManifest load_manifest(const std::string& root) {
    const fs::path path = fs::path(root) / "manifest.json";
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_manifest: cannot open " + path.string());
    nlohmann::json j;
    f >> j;

    const int ver = j.at("schema_version");
    if (ver != DatasetManifest::kSchemaVersion)
        throw std::runtime_error("load_manifest: unsupported schema version " +
                                 std::to_string(ver));

    DatasetManifest m;
    m.root = root;
    m.corpus_params = j.value("corpus_params", nlohmann::json::object());
    for (const auto& rj : j.at("records")) m.records.push_back(record_from_json(rj));
    m.train_ids = j.at("splits").at("train").get<std::vector<std::string>>();
    m.val_ids = j.at("splits").at("val").get<std::vector<std::string>>();
    m.test_ids = j.at("splits").at("test").get<std::vector<std::string>>();

    // ids unique, splits disjoint
    std::set<std::string> seen;
    for (const auto& r : m.records)
        if (!seen.insert(r.id).second)
            throw std::runtime_error("load_manifest: duplicate record id " + r.id);
    std::set<std::string> split_seen;
    for (const auto* ids : {&m.train_ids, &m.val_ids, &m.test_ids})
        for (const auto& id : *ids) {
            m.record(id);  // must exist
            if (!split_seen.insert(id).second)
                throw std::runtime_error("load_manifest: id in multiple splits: " + id);
        }

    // referenced media must exist
    std::vector<std::string> missing;
    for (const auto& r : m.records) {
        if (!fs::exists(fs::path(root) / r.wav_path)) missing.push_back(r.wav_path);
        char name[32];
        std::snprintf(name, sizeof(name), "/frame_%05d.png", r.frame_count - 1);
        if (!fs::exists(fs::path(root) / (r.frames_dir + name))) missing.push_back(r.frames_dir + name);
    }
    if (!missing.empty()) {
        std::string msg = "load_manifest: missing media:";
        for (const auto& p : missing) msg += " " + p;
        throw std::runtime_error(msg);
    }
    return m;
}

}  // namespace condfoley::data
