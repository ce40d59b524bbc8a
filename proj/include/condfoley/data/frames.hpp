// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "condfoley/data/types.hpp"

namespace condfoley::data {

struct Image {
    int width = 0, height = 0;
    std::vector<uint8_t> rgb;  // H*W*3

    uint8_t* px(int y, int x) { return &rgb[(static_cast<size_t>(y) * width + x) * 3]; }
    const uint8_t* px(int y, int x) const { return &rgb[(static_cast<size_t>(y) * width + x) * 3]; }
};

void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);

// frames_dir holds frame_%05d.png; loads [first, first+count) into a clip
VideoClip load_clip_frames(const std::string& frames_dir, int first, int count, int frame_rate);

}  // namespace condfoley::data
