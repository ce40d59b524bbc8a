// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "condfoley/dsp/types.hpp"

namespace condfoley::dsp {

// Spectrogram on disk: <path> holds raw float32 row-major values,
// <path>.json the shape/analysis sidecar.
void save_spectrogram(const std::string& path, const MelSpectrogram& m);
MelSpectrogram load_spectrogram(const std::string& path);

}  // namespace condfoley::dsp
