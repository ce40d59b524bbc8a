// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/generator/transformer.hpp"

namespace condfoley::generator {

// The trainable stack above the frozen codec: conditioning nets plus the
// decoder-only transformer, sharing one parameter store and checkpoint.
struct GeneratorModel {
    GeneratorConfig gcfg;
    conditioning::ConditioningConfig ccfg;
    dsp::MelConfig mel_cfg;
    nn::ParamStore params;
    conditioning::ConditioningModule cond;
    Transformer tf;

    GeneratorModel(const GeneratorConfig& g, const conditioning::ConditioningConfig& c,
                   uint64_t seed)
        : gcfg(g), ccfg(c) {
        Rng rng(seed);
        cond = conditioning::ConditioningModule(params, ccfg, rng);
        tf = Transformer(params, "tf", gcfg, rng);
    }

    void save(const std::string& path, nlohmann::json extra_meta = {}) const {
        nn::Checkpoint ck;
        ck.meta = std::move(extra_meta);
        ck.meta["kind"] = "generator";
        ck.meta["config"] = gcfg.to_json();
        ck.meta["conditioning"] = ccfg.to_json();
        ck.put_store(params);
        ck.save(path);
    }
    static GeneratorModel load(const std::string& path) {
        auto ck = nn::Checkpoint::load(path);
        if (ck.meta.value("kind", "") != "generator")
            throw std::runtime_error("generator load: checkpoint kind mismatch in " + path);
        GeneratorModel m(GeneratorConfig::from_json(ck.meta.at("config")),
                         conditioning::ConditioningConfig::from_json(ck.meta.at("conditioning")), 0);
        ck.load_into(m.params);
        return m;
    }
};

}  // namespace condfoley::generator
