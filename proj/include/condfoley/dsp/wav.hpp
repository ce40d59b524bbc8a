// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "condfoley/dsp/types.hpp"

namespace condfoley::dsp {

// 16-bit PCM mono little-endian WAV.
void write_wav(const std::string& path, const Waveform& w);
Waveform read_wav(const std::string& path);

}  // namespace condfoley::dsp
