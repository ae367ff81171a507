#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lemmarec {

// Dense 8-bit RGB image, row-major, interleaved channels.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size = width * height * 3

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

    std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    bool operator==(const Image& other) const = default;
};

// Binary PPM (P6), the pipeline's lossless RGB interchange format.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& img);

// Bilinear resample. Exact pass-through when the size already matches.
Image resize_bilinear(const Image& img, int out_w, int out_h);

}  // namespace lemmarec
