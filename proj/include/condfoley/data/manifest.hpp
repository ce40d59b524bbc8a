// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "condfoley/data/types.hpp"

namespace condfoley::data {

struct DatasetManifest {
    static constexpr int kSchemaVersion = 1;

    std::string root;  // directory containing manifest.json and media
    std::vector<VideoRecord> records;
    std::vector<std::string> train_ids, val_ids, test_ids;
    nlohmann::json corpus_params;

    const VideoRecord& record(const std::string& id) const;
    std::vector<const VideoRecord*> split(const std::string& name) const;
};

void save_manifest(const DatasetManifest& m);
// Validates schema version and checks referenced media files exist.
DatasetManifest load_manifest(const std::string& root);

}  // namespace condfoley::data
