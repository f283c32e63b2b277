#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdl/error.hpp"

namespace fdl {

// 8-bit RGB image, interleaved row-major.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    RgbImage() = default;
    RgbImage(int h, int w) : height(h), width(w), pixels(static_cast<size_t>(h) * w * 3, 0) {
        if (h <= 0 || w <= 0) throw ShapeError("image: extents must be positive");
    }

    std::uint8_t at(int y, int x, int c) const {
        return pixels[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t& at(int y, int x, int c) { return pixels[(static_cast<size_t>(y) * width + x) * 3 + c]; }

    bool operator==(const RgbImage& o) const {
        return height == o.height && width == o.width && pixels == o.pixels;
    }
};

// Binary PPM (P6, maxval 255). Header comments (#) are tolerated on read.
RgbImage ppm_read(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> ppm_write(const RgbImage& img);
RgbImage ppm_read_file(const std::string& path);
void ppm_write_file(const std::string& path, const RgbImage& img);

// Binary PGM (P5, maxval 255), used for heat-map emission.
void pgm_write_file(const std::string& path, int height, int width, const std::vector<std::uint8_t>& gray);

// 2x2 box average per channel, round to nearest. Extents must be even.
RgbImage downsample2x(const RgbImage& img);

// Nearest-neighbor 2x upscale (each pixel becomes a 2x2 block).
RgbImage upsample2x(const RgbImage& img);

// Edge-replication padding up to the next multiple of 8 per axis.
RgbImage pad_to_multiple_of_8(const RgbImage& img);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

}  // namespace fdl
