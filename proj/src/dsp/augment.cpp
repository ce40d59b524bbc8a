// SPDX-License-Identifier: Apache-2.0
#include "condfoley/dsp/augment.hpp"

namespace condfoley::dsp {

MelSpectrogram spec_augment(const MelSpectrogram& m, Rng& rng, int max_freq_mask,
                            int max_time_mask, float fill_value) {
    require(max_freq_mask >= 0 && max_freq_mask < m.num_mels,
            "spec_augment: freq mask width must be < num_mels");
    require(max_time_mask >= 0 && max_time_mask < m.num_frames,
            "spec_augment: time mask width must be < num_frames");

    MelSpectrogram out = m;
    const int fw = max_freq_mask > 0 ? rng.uniform_int(0, max_freq_mask) : 0;
    const int f0 = fw > 0 ? rng.uniform_int(0, m.num_mels - fw) : 0;
    const int tw = max_time_mask > 0 ? rng.uniform_int(0, max_time_mask) : 0;
    const int t0 = tw > 0 ? rng.uniform_int(0, m.num_frames - tw) : 0;

    for (int t = 0; t < m.num_frames; ++t)
        for (int f = f0; f < f0 + fw; ++f) out.at(t, f) = fill_value;
    for (int t = t0; t < t0 + tw; ++t)
        for (int f = 0; f < m.num_mels; ++f) out.at(t, f) = fill_value;
    return out;
}

}  // namespace condfoley::dsp
