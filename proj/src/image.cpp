#include "lemmarec/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lemmarec/errors.hpp"

namespace lemmarec {

namespace {

int read_ppm_token(std::istream& in) {
    // Skips whitespace and '#' comments between header fields.
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    return value;
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image file: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P6") throw FormatError("not a binary PPM (P6) file: " + path.string());
    const int w = read_ppm_token(in);
    const int h = read_ppm_token(in);
    const int maxval = read_ppm_token(in);
    if (w <= 0 || h <= 0 || maxval != 255) throw FormatError("unsupported PPM header in " + path.string());
    in.get();  // single whitespace after maxval
    Image img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
        throw FormatError("truncated PPM payload in " + path.string());
    }
    return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
    if (img.width <= 0 || img.height <= 0) throw ValidationError("refusing to write zero-area image");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write image file: " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("failed writing image payload: " + path.string());
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    if (img.width <= 0 || img.height <= 0) throw ValidationError("cannot resize zero-area image");
    if (out_w <= 0 || out_h <= 0) throw ValidationError("target image size must be positive");
    if (out_w == img.width && out_h == img.height) return img;

    Image out(out_w, out_h);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            const std::uint8_t* p00 = img.at(x0, y0);
            const std::uint8_t* p10 = img.at(x1, y0);
            const std::uint8_t* p01 = img.at(x0, y1);
            const std::uint8_t* p11 = img.at(x1, y1);
            std::uint8_t* dst = out.at(x, y);
            for (int c = 0; c < 3; ++c) {
                const double top = p00[c] + (p10[c] - p00[c]) * wx;
                const double bot = p01[c] + (p11[c] - p01[c]) * wx;
                dst[c] = static_cast<std::uint8_t>(std::lround(std::clamp(top + (bot - top) * wy, 0.0, 255.0)));
            }
        }
    }
    return out;
}

}  // namespace lemmarec
