// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "condfoley/nn/layers.hpp"

namespace condfoley::nn {

// Single-archive checkpoint: JSON metadata (config, seed, epoch, loss trace)
// plus an indexed float32 blob of parameter tensors keyed by module path.
struct Checkpoint {
    static constexpr uint32_t kFormatVersion = 1;

    nlohmann::json meta;
    std::map<std::string, NdArray> tensors;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    void put_store(const ParamStore& ps);
    // Copies values into an existing store; shapes must match exactly.
    void load_into(ParamStore& ps) const;
};

}  // namespace condfoley::nn
