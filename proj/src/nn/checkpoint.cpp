// SPDX-License-Identifier: Apache-2.0
#include "condfoley/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace condfoley::nn {

namespace {
constexpr char kMagic[4] = {'C', 'F', 'C', 'K'};
}

void Checkpoint::save(const std::string& path) const {
    nlohmann::json index;
    uint64_t offset = 0;
    for (const auto& [name, arr] : tensors) {
        index[name] = {{"shape", arr.shape}, {"offset", offset}};
        offset += static_cast<uint64_t>(arr.size()) * sizeof(float);
    }
    nlohmann::json header;
    header["format_version"] = kFormatVersion;
    header["meta"] = meta;
    header["index"] = index;
    const std::string hs = header.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint save: cannot open " + path);
    f.write(kMagic, 4);
    const uint32_t ver = kFormatVersion;
    f.write(reinterpret_cast<const char*>(&ver), 4);
    const uint64_t hlen = hs.size();
    f.write(reinterpret_cast<const char*>(&hlen), 8);
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, arr] : tensors)
        f.write(reinterpret_cast<const char*>(arr.data()),
                static_cast<std::streamsize>(arr.size() * sizeof(float)));
    if (!f) throw std::runtime_error("checkpoint save: short write to " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint load: cannot open " + path);
    char magic[4];
    uint32_t ver = 0;
    uint64_t hlen = 0;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&ver), 4);
    f.read(reinterpret_cast<char*>(&hlen), 8);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint load: bad magic in " + path);
    if (ver != kFormatVersion)
        throw std::runtime_error("checkpoint load: unsupported format version " +
                                 std::to_string(ver) + " in " + path);
    std::string hs(hlen, '\0');
    f.read(hs.data(), static_cast<std::streamsize>(hlen));
    const auto header = nlohmann::json::parse(hs);

    Checkpoint ck;
    ck.meta = header.at("meta");
    const uint64_t data_start = 4 + 4 + 8 + hlen;
    for (const auto& [name, entry] : header.at("index").items()) {
        NdArray arr(entry.at("shape").get<std::vector<int>>());
        f.seekg(static_cast<std::streamoff>(data_start + entry.at("offset").get<uint64_t>()));
        f.read(reinterpret_cast<char*>(arr.data()),
               static_cast<std::streamsize>(arr.size() * sizeof(float)));
        if (!f) throw std::runtime_error("checkpoint load: truncated tensor " + name);
        ck.tensors[name] = std::move(arr);
    }
    return ck;
}

void Checkpoint::put_store(const ParamStore& ps) {
    for (const auto& [name, t] : ps.params) tensors[name] = t->value;
}

void Checkpoint::load_into(ParamStore& ps) const {
    for (auto& [name, t] : ps.params) {
        auto it = tensors.find(name);
        if (it == tensors.end())
            throw std::runtime_error("checkpoint: missing tensor " + name);
        if (it->second.shape != t->value.shape)
            throw std::runtime_error("checkpoint: shape mismatch for " + name);
        t->value = it->second;
    }
}

}  // namespace condfoley::nn
