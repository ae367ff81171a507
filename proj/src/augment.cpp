#include "lemmarec/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lemmarec/errors.hpp"

namespace lemmarec::aug {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

void require_range(double lo, double hi, const char* name) {
    if (!(lo <= hi)) throw ConfigError(std::string("augment range for ") + name + " is inverted");
}

double luma(const std::uint8_t* px) { return 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]; }

struct Hsv {
    double h = 0.0;  // turns in [0, 1)
    double s = 0.0;
    double v = 0.0;
};

Hsv rgb_to_hsv(double r, double g, double b) {
    const double max = std::max({r, g, b});
    const double min = std::min({r, g, b});
    const double delta = max - min;
    Hsv out;
    out.v = max;
    out.s = max > 0.0 ? delta / max : 0.0;
    if (delta > 0.0) {
        if (max == r) {
            out.h = (g - b) / delta / 6.0;
        } else if (max == g) {
            out.h = (2.0 + (b - r) / delta) / 6.0;
        } else {
            out.h = (4.0 + (r - g) / delta) / 6.0;
        }
        out.h -= std::floor(out.h);
    }
    return out;
}

void hsv_to_rgb(const Hsv& hsv, double& r, double& g, double& b) {
    const double h6 = hsv.h * 6.0;
    const int sextant = static_cast<int>(std::floor(h6)) % 6;
    const double f = h6 - std::floor(h6);
    const double p = hsv.v * (1.0 - hsv.s);
    const double q = hsv.v * (1.0 - hsv.s * f);
    const double t = hsv.v * (1.0 - hsv.s * (1.0 - f));
    switch (sextant) {
        case 0: r = hsv.v; g = t; b = p; break;
        case 1: r = q; g = hsv.v; b = p; break;
        case 2: r = p; g = hsv.v; b = t; break;
        case 3: r = p; g = q; b = hsv.v; break;
        case 4: r = t; g = p; b = hsv.v; break;
        default: r = hsv.v; g = p; b = q; break;
    }
}

std::vector<double> gaussian_taps(double sigma) {
    const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> taps(static_cast<std::size_t>(2 * half + 1));
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(i + half)] = w;
        sum += w;
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

}  // namespace

void AugmentConfig::validate() const {
    double sum = 0.0;
    for (double p : pipeline_probabilities) {
        if (p < 0.0) throw ConfigError("pipeline probabilities must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("pipeline probabilities must sum to 1");
    require_range(rotation_min_deg, rotation_max_deg, "rotation");
    require_range(blur_radius_min, blur_radius_max, "blur radius");
    require_range(sharpness_min, sharpness_max, "sharpness");
    require_range(brightness_min, brightness_max, "brightness");
    require_range(contrast_min, contrast_max, "contrast");
    require_range(saturation_min, saturation_max, "saturation");
    require_range(hue_min, hue_max, "hue");
    if (mask_count_min < 0 || mask_count_max < mask_count_min) throw ConfigError("bad mask count range");
    require_range(mask_area_min, mask_area_max, "mask area");
    if (mask_area_min < 0.0 || mask_area_max > 1.0) throw ConfigError("mask area fractions must lie in [0, 1]");
}

AugmentConfig AugmentConfig::preset(std::string_view name) {
    AugmentConfig cfg;
    if (name == "full") return cfg;
    if (name == "no-masking") {
        cfg.enable_masking = false;
        return cfg;
    }
    if (name == "no-rotation") {
        cfg.enable_rotation = false;
        return cfg;
    }
    if (name == "no-color") {
        cfg.enable_color = false;
        return cfg;
    }
    throw ConfigError("unknown augmentation preset: " + std::string(name));
}

Pipeline choose_pipeline(const SampleRng& rng, const AugmentConfig& cfg) {
    cfg.validate();
    Rng stream = rng.stream("pipeline");
    const double u = stream.uniform01();
    if (u < cfg.pipeline_probabilities[0]) return Pipeline::A;
    if (u < cfg.pipeline_probabilities[0] + cfg.pipeline_probabilities[1]) return Pipeline::B;
    return Pipeline::C;
}

Image gaussian_blur(const Image& img, double radius) {
    if (radius <= 0.0) return img;
    const auto taps = gaussian_taps(radius);
    const int half = (static_cast<int>(taps.size()) - 1) / 2;
    const int w = img.width;
    const int h = img.height;

    // horizontal pass, replicated borders
    std::vector<double> tmp(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (int k = -half; k <= half; ++k) {
                const int xs = std::clamp(x + k, 0, w - 1);
                const std::uint8_t* px = img.at(xs, y);
                const double t = taps[static_cast<std::size_t>(k + half)];
                acc[0] += t * px[0];
                acc[1] += t * px[1];
                acc[2] += t * px[2];
            }
            double* dst = &tmp[(static_cast<std::size_t>(y) * w + x) * 3];
            dst[0] = acc[0];
            dst[1] = acc[1];
            dst[2] = acc[2];
        }
    }
    // vertical pass
    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (int k = -half; k <= half; ++k) {
                const int ys = std::clamp(y + k, 0, h - 1);
                const double* px = &tmp[(static_cast<std::size_t>(ys) * w + x) * 3];
                const double t = taps[static_cast<std::size_t>(k + half)];
                acc[0] += t * px[0];
                acc[1] += t * px[1];
                acc[2] += t * px[2];
            }
            std::uint8_t* dst = out.at(x, y);
            dst[0] = to_u8(acc[0]);
            dst[1] = to_u8(acc[1]);
            dst[2] = to_u8(acc[2]);
        }
    }
    return out;
}

Image adjust_sharpness(const Image& img, double factor) {
    if (factor == 1.0) return img;
    // blend against a fixed 3x3 smoothing kernel [[1,2,1],[2,4,2],[1,2,1]]/16
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double smooth = 0.0;
                static constexpr int kWeights[3][3] = {{1, 2, 1}, {2, 4, 2}, {1, 2, 1}};
                for (int oy = -1; oy <= 1; ++oy) {
                    for (int ox = -1; ox <= 1; ++ox) {
                        const int xs = std::clamp(x + ox, 0, img.width - 1);
                        const int ys = std::clamp(y + oy, 0, img.height - 1);
                        smooth += kWeights[oy + 1][ox + 1] * img.at(xs, ys)[c];
                    }
                }
                smooth /= 16.0;
                out.at(x, y)[c] = to_u8(smooth + factor * (img.at(x, y)[c] - smooth));
            }
        }
    }
    return out;
}

Image adjust_brightness(const Image& img, double factor) {
    if (factor == 1.0) return img;
    Image out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = to_u8(img.pixels[i] * factor);
    return out;
}

Image adjust_contrast(const Image& img, double factor) {
    if (factor == 1.0) return img;
    double mean = 0.0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) mean += luma(img.at(x, y));
    }
    mean /= static_cast<double>(img.width) * img.height;
    Image out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        out.pixels[i] = to_u8(mean + factor * (img.pixels[i] - mean));
    }
    return out;
}

Image adjust_saturation(const Image& img, double factor) {
    if (factor == 1.0) return img;
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t* src = img.at(x, y);
            std::uint8_t* dst = out.at(x, y);
            const double l = luma(src);
            for (int c = 0; c < 3; ++c) dst[c] = to_u8(l + factor * (src[c] - l));
        }
    }
    return out;
}

Image shift_hue(const Image& img, double delta_turns) {
    if (delta_turns == 0.0) return img;
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t* src = img.at(x, y);
            Hsv hsv = rgb_to_hsv(src[0] / 255.0, src[1] / 255.0, src[2] / 255.0);
            hsv.h += delta_turns;
            hsv.h -= std::floor(hsv.h);
            double r, g, b;
            hsv_to_rgb(hsv, r, g, b);
            std::uint8_t* dst = out.at(x, y);
            dst[0] = to_u8(r * 255.0);
            dst[1] = to_u8(g * 255.0);
            dst[2] = to_u8(b * 255.0);
        }
    }
    return out;
}

Image rotate_about_center(const Image& img, double degrees) {
    if (degrees == 0.0) return img;
    const double rad = degrees * kPi / 180.0;
    const double cos_t = std::cos(rad);
    const double sin_t = std::sin(rad);
    const double cx = 0.5 * (img.width - 1);
    const double cy = 0.5 * (img.height - 1);
    Image out(img.width, img.height, 255);  // exposed corners stay white
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            // inverse mapping: rotate the output coordinate back by -degrees
            const double dx = x - cx;
            const double dy = y - cy;
            const double sx = cx + cos_t * dx + sin_t * dy;
            const double sy = cy - sin_t * dx + cos_t * dy;
            if (sx < 0.0 || sy < 0.0 || sx > img.width - 1 || sy > img.height - 1) continue;
            const int x0 = static_cast<int>(sx);
            const int y0 = static_cast<int>(sy);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const int y1 = std::min(y0 + 1, img.height - 1);
            const double fx = sx - x0;
            const double fy = sy - y0;
            std::uint8_t* dst = out.at(x, y);
            for (int c = 0; c < 3; ++c) {
                const double top = img.at(x0, y0)[c] + (img.at(x1, y0)[c] - img.at(x0, y0)[c]) * fx;
                const double bot = img.at(x0, y1)[c] + (img.at(x1, y1)[c] - img.at(x0, y1)[c]) * fx;
                dst[c] = to_u8(top + (bot - top) * fy);
            }
        }
    }
    return out;
}

Image random_rotate(const Image& img, const SampleRng& rng, const AugmentConfig& cfg) {
    Rng stream = rng.stream("rotate");
    const double angle = stream.uniform(cfg.rotation_min_deg, cfg.rotation_max_deg);
    return rotate_about_center(img, angle);
}

Image random_mask(const Image& img, const SampleRng& rng, const AugmentConfig& cfg) {
    Rng stream = rng.stream("mask");
    const auto count = stream.uniform_int(cfg.mask_count_min, cfg.mask_count_max);
    if (count == 0) return img;
    Image out = img;
    for (std::int64_t i = 0; i < count; ++i) {
        const double frac = stream.uniform(cfg.mask_area_min, cfg.mask_area_max);
        const double aspect = stream.uniform(0.3, 3.0);
        const double area = frac * img.width * img.height;
        int rw = std::max(1, static_cast<int>(std::lround(std::sqrt(area * aspect))));
        int rh = std::max(1, static_cast<int>(std::lround(std::sqrt(area / aspect))));
        rw = std::min(rw, img.width);
        rh = std::min(rh, img.height);
        const auto rx = static_cast<int>(stream.uniform_int(0, img.width - rw));
        const auto ry = static_cast<int>(stream.uniform_int(0, img.height - rh));
        for (int y = ry; y < ry + rh; ++y) {
            std::uint8_t* row = out.at(rx, y);
            std::fill(row, row + static_cast<std::size_t>(rw) * 3, std::uint8_t{0});
        }
    }
    return out;
}

namespace {

Image apply_blur_step(const Image& img, const SampleRng& rng, const AugmentConfig& cfg) {
    Rng stream = rng.stream("blur");
    return gaussian_blur(img, stream.uniform(cfg.blur_radius_min, cfg.blur_radius_max));
}

Image apply_sharpness_step(const Image& img, const SampleRng& rng, const AugmentConfig& cfg) {
    Rng stream = rng.stream("sharpness");
    return adjust_sharpness(img, stream.uniform(cfg.sharpness_min, cfg.sharpness_max));
}

// The four color-perception steps, gated together by enable_color.
Image apply_color_steps(Image img, const SampleRng& rng, const AugmentConfig& cfg) {
    const double brightness = rng.stream("brightness").uniform(cfg.brightness_min, cfg.brightness_max);
    const double contrast = rng.stream("contrast").uniform(cfg.contrast_min, cfg.contrast_max);
    const double saturation = rng.stream("saturation").uniform(cfg.saturation_min, cfg.saturation_max);
    const double hue = rng.stream("hue").uniform(cfg.hue_min, cfg.hue_max);
    if (!cfg.enable_color) return img;
    img = adjust_brightness(img, brightness);
    img = adjust_contrast(img, contrast);
    img = adjust_saturation(img, saturation);
    img = shift_hue(img, hue);
    return img;
}

Image apply_shared_steps(Image img, const SampleRng& rng, const AugmentConfig& cfg) {
    if (cfg.enable_rotation) img = random_rotate(img, rng, cfg);
    if (cfg.enable_masking) img = random_mask(img, rng, cfg);
    return img;
}

}  // namespace

Image apply_pipeline_a(const Image& img, const SampleRng& rng, const AugmentConfig& cfg) {
    cfg.validate();
    Image out = apply_blur_step(img, rng, cfg);
    out = apply_sharpness_step(out, rng, cfg);
    return apply_shared_steps(std::move(out), rng, cfg);
}

Image apply_pipeline_b(const Image& img, const SampleRng& rng, const AugmentConfig& cfg) {
    cfg.validate();
    Image out = apply_sharpness_step(img, rng, cfg);
    out = apply_color_steps(std::move(out), rng, cfg);
    return apply_shared_steps(std::move(out), rng, cfg);
}

Image apply_pipeline_c(const Image& img, const SampleRng& rng, const AugmentConfig& cfg) {
    cfg.validate();
    Image out = apply_blur_step(img, rng, cfg);
    out = apply_sharpness_step(out, rng, cfg);
    out = apply_color_steps(std::move(out), rng, cfg);
    return apply_shared_steps(std::move(out), rng, cfg);
}

Image augment_sample(const Image& img, const SampleRng& rng, const AugmentConfig& cfg) {
    switch (choose_pipeline(rng, cfg)) {
        case Pipeline::A: return apply_pipeline_a(img, rng, cfg);
        case Pipeline::B: return apply_pipeline_b(img, rng, cfg);
        default: return apply_pipeline_c(img, rng, cfg);
    }
}

}  // namespace lemmarec::aug
