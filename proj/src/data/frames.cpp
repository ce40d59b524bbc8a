// SPDX-License-Identifier: Apache-2.0
#include "condfoley/data/frames.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace condfoley::data {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_png(const std::string& path, const Image& img) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("write_png: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png: libpng error writing " + path);
    }
    png_init_io(png, f.get());
    png_set_compression_level(png, 4);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.px(y, 0)));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("read_png: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: libpng error reading " + path);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    Image img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.rgb.resize(static_cast<size_t>(img.width) * img.height * 3);
    for (int y = 0; y < img.height; ++y) png_read_row(png, img.px(y, 0), nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

VideoClip load_clip_frames(const std::string& frames_dir, int first, int count, int frame_rate) {
    require(count > 0 && first >= 0, "load_clip_frames: bad range");
    VideoClip clip;
    clip.frame_rate = frame_rate;
    char name[32];
    for (int i = 0; i < count; ++i) {
        std::snprintf(name, sizeof(name), "/frame_%05d.png", first + i);
        const Image img = read_png(frames_dir + name);
        if (i == 0) clip.frames = nn::NdArray({count, 3, img.height, img.width});
        require(img.height == clip.frames.dim(2) && img.width == clip.frames.dim(3),
                "load_clip_frames: inconsistent frame size");
        const int64_t plane = static_cast<int64_t>(img.height) * img.width;
        float* dst = &clip.frames[static_cast<int64_t>(i) * 3 * plane];
        for (int64_t p = 0; p < plane; ++p)
            for (int c = 0; c < 3; ++c)
                dst[static_cast<int64_t>(c) * plane + p] =
                    static_cast<float>(img.rgb[static_cast<size_t>(p) * 3 + static_cast<size_t>(c)]) / 255.0f;
    }
    return clip;
}

}  // namespace condfoley::data
