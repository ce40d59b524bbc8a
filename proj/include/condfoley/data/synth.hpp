// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "condfoley/data/manifest.hpp"

namespace condfoley::data {

// Procedural corpus: a striker disc over a colored surface band. Hits bounce
// vertically and ring a decaying harmonic tone at the material fundamental
// f_m = 440 * 2^(m/4); scratches drag horizontally under a 300 ms noise band
// centered on f_m. Contact frames and audio onsets share the frame grid.
struct SynthConfig {
    int materials = 8;  // M
    int num_videos = 50;
    uint64_t seed = 7;
    double min_duration = 8.0, max_duration = 12.0;
    int fps = 15;
    int width = 112, height = 112;
    int sample_rate = 22050;
    double min_event_gap = 0.65, max_event_gap = 1.4;
    double hue_jitter = 0.03;  // fraction of the hue circle, per video
    int threads = 2;

    // acceptance-scenario overrides
    double fixed_duration = 0.0;  // >0: exact duration
    int fixed_events = 0;         // >0: exactly this many, evenly spread
    int action_mode = -1;         // -1 alternating, 0 all hits, 1 all scratches

    nlohmann::json to_json() const;
};

double material_fundamental(int material);

// Renders one event's audio into `out` at `t0` (used by tests as an oracle).
void render_hit_tone(dsp::Waveform& out, double t0, int material, float amp);
void render_scratch_noise(dsp::Waveform& out, double t0, int material, float amp, Rng& rng);

DatasetManifest synth_generate_dataset(const SynthConfig& cfg, const std::string& out_root);

}  // namespace condfoley::data
