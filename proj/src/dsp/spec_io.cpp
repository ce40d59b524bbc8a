// SPDX-License-Identifier: Apache-2.0
#include "condfoley/dsp/spec_io.hpp"

#include <fstream>

#include <json.hpp>

namespace condfoley::dsp {

void save_spectrogram(const std::string& path, const MelSpectrogram& m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_spectrogram: cannot open " + path);
    f.write(reinterpret_cast<const char*>(m.values.data()),
            static_cast<std::streamsize>(m.values.size() * sizeof(float)));
    if (!f) throw std::runtime_error("save_spectrogram: short write to " + path);

    nlohmann::json j;
    j["shape"] = {m.num_frames, m.num_mels};
    j["hop_length"] = m.hop_length;
    j["num_fft"] = m.num_fft;
    j["num_mels"] = m.num_mels;
    j["sample_rate"] = m.sample_rate;
    std::ofstream jf(path + ".json");
    if (!jf) throw std::runtime_error("save_spectrogram: cannot open " + path + ".json");
    jf << j.dump(2) << "\n";
}

MelSpectrogram load_spectrogram(const std::string& path) {
    std::ifstream jf(path + ".json");
    if (!jf) throw std::runtime_error("load_spectrogram: missing sidecar " + path + ".json");
    nlohmann::json j;
    jf >> j;

    MelSpectrogram m;
    m.num_frames = j.at("shape").at(0).get<int>();
    m.num_mels = j.at("shape").at(1).get<int>();
    m.hop_length = j.at("hop_length").get<int>();
    m.num_fft = j.at("num_fft").get<int>();
    m.sample_rate = j.at("sample_rate").get<int>();

    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_spectrogram: cannot open " + path);
    m.values.resize(static_cast<size_t>(m.num_frames) * m.num_mels);
    f.read(reinterpret_cast<char*>(m.values.data()),
           static_cast<std::streamsize>(m.values.size() * sizeof(float)));
    if (f.gcount() != static_cast<std::streamsize>(m.values.size() * sizeof(float)))
        throw std::runtime_error("load_spectrogram: truncated data in " + path);
    return m;
}

}  // namespace condfoley::dsp
