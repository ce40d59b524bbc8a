// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "condfoley/dsp/types.hpp"
#include "condfoley/nn/array.hpp"

namespace condfoley::data {

enum class Action { kHit = 0, kScratch = 1 };

inline const char* action_name(Action a) { return a == Action::kHit ? "hit" : "scratch"; }
inline Action action_from_name(const std::string& s) {
    if (s == "hit") return Action::kHit;
    if (s == "scratch") return Action::kScratch;
    throw std::invalid_argument("unknown action: " + s);
}

struct VideoClip {
    nn::NdArray frames;  // [T, 3, H, W], values in [0, 1]
    int frame_rate = 15;

    int num_frames() const { return frames.dim(0); }
    double duration() const { return static_cast<double>(num_frames()) / frame_rate; }
};

struct VideoRecord {
    std::string id;
    double duration = 0.0;
    int frame_count = 0;
    int frame_rate = 15;
    std::string frames_dir;  // relative to the dataset root
    std::string wav_path;
    bool has_labels = false;
    int material = -1;
    Action action = Action::kHit;
    std::vector<double> impact_times;  // seconds, synthetic ground truth
};

struct ClipPair {
    VideoClip input_video;
    dsp::Waveform input_audio;  // held-out target a_g
    VideoClip cond_video;
    dsp::Waveform cond_audio;  // a_c

    std::string input_id, cond_id;
    double t_input = 0.0, t_cond = 0.0;  // clip centers in source time

    bool has_labels = false;
    int input_material = -1, cond_material = -1;
    Action input_action = Action::kHit, cond_action = Action::kHit;
    std::vector<double> input_impact_times;  // clip-local seconds
    std::vector<double> cond_impact_times;
};

}  // namespace condfoley::data
