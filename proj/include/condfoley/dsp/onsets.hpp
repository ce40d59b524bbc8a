// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/dsp/types.hpp"

namespace condfoley::dsp {

struct OnsetConfig {
    MelConfig mel;
    double min_gap_s = 0.05;        // minimum inter-onset gap
    double median_window_s = 0.5;   // local threshold window
    float threshold_delta = 0.12;   // flux above local median required for a peak
    double confidence_window_s = 0.06;
    float noise_floor = 3e-4f;      // mel energies below this do not count as flux
    double min_confidence = 0.02;   // drop sub-noise picks
    int memory_frames = 18;         // flux compares against the max of this many
                                    // previous frames (suppresses band fading)
    float rel_threshold = 0.3f;     // peak must reach this fraction of the local
                                    // flux maximum (attacks from silence dominate)
    double rel_window_s = 0.35;
};

// Spectral-flux onset picker with median thresholding. Confidence of each
// onset is the local peak amplitude normalized by the clip maximum.
OnsetList detect_onsets(const Waveform& w, const OnsetConfig& cfg = {});

}  // namespace condfoley::dsp
