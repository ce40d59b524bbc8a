// SPDX-License-Identifier: Apache-2.0
#include "condfoley/dsp/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace condfoley::dsp {

namespace {

void put_u32(std::string& s, uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}
uint32_t get_u32(const char* p) {
    uint32_t v = 0;
    std::memcpy(&v, p, 4);
    return v;
}
uint16_t get_u16(const char* p) {
    uint16_t v = 0;
    std::memcpy(&v, p, 2);
    return v;
}

}  // namespace

void write_wav(const std::string& path, const Waveform& w) {
    w.validate();
    const uint32_t n = static_cast<uint32_t>(w.samples.size());
    const uint32_t data_bytes = n * 2;
    std::string hdr;
    hdr.reserve(44);
    hdr += "RIFF";
    put_u32(hdr, 36 + data_bytes);
    hdr += "WAVEfmt ";
    put_u32(hdr, 16);
    put_u16(hdr, 1);  // PCM
    put_u16(hdr, 1);  // mono
    put_u32(hdr, static_cast<uint32_t>(w.sample_rate));
    put_u32(hdr, static_cast<uint32_t>(w.sample_rate) * 2);
    put_u16(hdr, 2);
    put_u16(hdr, 16);
    hdr += "data";
    put_u32(hdr, data_bytes);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_wav: cannot open " + path);
    f.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    std::vector<char> buf(static_cast<size_t>(data_bytes));
    for (uint32_t i = 0; i < n; ++i) {
        const float x = std::clamp(w.samples[i], -1.0f, 1.0f);
        const int16_t q = static_cast<int16_t>(std::lrintf(x * 32767.0f));
        buf[2 * i] = static_cast<char>(q & 0xff);
        buf[2 * i + 1] = static_cast<char>((q >> 8) & 0xff);
    }
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("write_wav: short write to " + path);
}

Waveform read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_wav: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 44 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
        throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);

    Waveform w;
    size_t pos = 12;
    uint16_t channels = 0, bits = 0;
    bool got_fmt = false;
    while (pos + 8 <= bytes.size()) {
        const std::string id = bytes.substr(pos, 4);
        const uint32_t sz = get_u32(bytes.data() + pos + 4);
        pos += 8;
        if (id == "fmt ") {
            if (sz < 16 || pos + 16 > bytes.size())
                throw std::runtime_error("read_wav: bad fmt chunk");
            const uint16_t fmt = get_u16(bytes.data() + pos);
            channels = get_u16(bytes.data() + pos + 2);
            w.sample_rate = static_cast<int>(get_u32(bytes.data() + pos + 4));
            bits = get_u16(bytes.data() + pos + 14);
            if (fmt != 1 || channels != 1 || bits != 16)
                throw std::runtime_error("read_wav: expected 16-bit PCM mono: " + path);
            got_fmt = true;
        } else if (id == "data") {
            if (!got_fmt) throw std::runtime_error("read_wav: data before fmt");
            const size_t n = std::min<size_t>(sz, bytes.size() - pos) / 2;
            w.samples.resize(n);
            for (size_t i = 0; i < n; ++i) {
                int16_t q;
                std::memcpy(&q, bytes.data() + pos + 2 * i, 2);
                w.samples[i] = static_cast<float>(q) / 32767.0f;
            }
            return w;
        }
        pos += sz + (sz & 1);
    }
    throw std::runtime_error("read_wav: no data chunk in " + path);
}

}  // namespace condfoley::dsp
