#pragma once

#include <array>
#include <string_view>

#include "lemmarec/image.hpp"
#include "lemmarec/rng.hpp"

namespace lemmarec::aug {

enum class Pipeline { A, B, C };

// On-the-fly augmentation settings. Every technique draws from its own
// substream of the per-sample rng, so toggling or re-ranging one technique
// never shifts the draws any other technique sees (the stream-stability
// property the ablation presets rely on).
//
// Identity values: blur radius 0, sharpness/brightness/contrast/saturation 1,
// hue shift 0, rotation 0, mask count 0.
struct AugmentConfig {
    std::array<double, 3> pipeline_probabilities{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

    bool enable_masking = true;
    bool enable_rotation = true;
    bool enable_color = true;

    double rotation_min_deg = -10.0;
    double rotation_max_deg = 10.0;
    double blur_radius_min = 0.0;
    double blur_radius_max = 2.5;
    double sharpness_min = 0.0;
    double sharpness_max = 2.0;
    double brightness_min = 0.6;
    double brightness_max = 1.4;
    double contrast_min = 0.6;
    double contrast_max = 1.4;
    double saturation_min = 0.6;
    double saturation_max = 1.4;
    double hue_min = -0.1;
    double hue_max = 0.1;
    int mask_count_min = 1;
    int mask_count_max = 3;
    double mask_area_min = 0.02;
    double mask_area_max = 0.10;

    void validate() const;

    // "full", "no-masking", "no-rotation", "no-color" (the ablation rows).
    static AugmentConfig preset(std::string_view name);
};

Pipeline choose_pipeline(const SampleRng& rng, const AugmentConfig& cfg);

// Pipeline A: blur + sharpness, then the shared steps (rotation, masking).
Image apply_pipeline_a(const Image& img, const SampleRng& rng, const AugmentConfig& cfg);
// Pipeline B: brightness, contrast, saturation, sharpness, hue + shared steps.
Image apply_pipeline_b(const Image& img, const SampleRng& rng, const AugmentConfig& cfg);
// Pipeline C: A's steps, then B's steps (sharpness once), then shared steps.
Image apply_pipeline_c(const Image& img, const SampleRng& rng, const AugmentConfig& cfg);

// choose_pipeline + dispatch; the full per-sample augmentation.
Image augment_sample(const Image& img, const SampleRng& rng, const AugmentConfig& cfg);

// Shared steps, also usable standalone.
Image random_rotate(const Image& img, const SampleRng& rng, const AugmentConfig& cfg);
Image random_mask(const Image& img, const SampleRng& rng, const AugmentConfig& cfg);

// Deterministic primitives behind the draws (exposed for tests and the
// noisy-render tooling).
Image gaussian_blur(const Image& img, double radius);
Image adjust_sharpness(const Image& img, double factor);
Image adjust_brightness(const Image& img, double factor);
Image adjust_contrast(const Image& img, double factor);
Image adjust_saturation(const Image& img, double factor);
Image shift_hue(const Image& img, double delta_turns);
Image rotate_about_center(const Image& img, double degrees);  // white fill

}  // namespace lemmarec::aug
