// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/dsp/types.hpp"

namespace condfoley::dsp {

// Frequency + time masking: exactly one band along each axis is set to the
// fill value (width may be zero). All other cells are untouched.
MelSpectrogram spec_augment(const MelSpectrogram& m, Rng& rng, int max_freq_mask,
                            int max_time_mask, float fill_value = std::log(kLogEps));

}  // namespace condfoley::dsp
