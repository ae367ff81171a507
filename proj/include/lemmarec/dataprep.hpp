#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lemmarec/image.hpp"

namespace lemmarec::data {

// Pixel box, origin top-left, inclusive-exclusive.
struct BBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    std::int64_t area() const { return static_cast<std::int64_t>(width()) * height(); }
    double center_x() const { return 0.5 * (x0 + x1); }
    double center_y() const { return 0.5 * (y0 + y1); }

    bool operator==(const BBox&) const = default;
};

// Throws ValidationError unless 0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height.
void validate_box(const BBox& box, int image_width, int image_height);

// One detector output line: a card image plus its candidate lemma boxes.
struct CardRecord {
    std::string image_path;
    int image_width = 0;
    int image_height = 0;
    std::vector<BBox> candidate_boxes;
    std::string label;  // NFC-normalized at ingestion
};

enum class Split { train, test };

struct ManifestEntry {
    std::string path;
    std::string label;
    Split split = Split::train;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::uint64_t split_seed = 0;
    double train_fraction = 0.85;

    std::int64_t count(Split s) const;
};

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

struct BoxValidationReport {
    std::map<int, Quartiles> width_quartiles_by_length;
    double pearson_r = 0.0;
    bool flagged = false;
};

// The two post-processing rules for detector outputs: keep only candidates
// whose center falls in the upper-left image quarter, then take the largest
// by pixel area. Ties break on smallest (y0, x0, y1, x1). Returns nullopt when
// nothing qualifies.
std::optional<BBox> select_lemma_box(const std::vector<BBox>& boxes, int image_width, int image_height);

// Verbatim pixel copy of `box` from the card image.
Image extract_crop(const Image& card, const BBox& box);

// Deterministic shuffle under `seed`, first floor(n * train_fraction) entries
// to train. Same seed, same entries -> identical partition.
DatasetManifest split_dataset(const std::vector<std::pair<std::string, std::string>>& entries, double train_fraction,
                              std::uint64_t seed);

// Sanity heuristic for detector boxes: lemma length should correlate linearly
// with box width. Inputs are (label length, box width) pairs from records with
// a selected box; needs at least 10 of them.
BoxValidationReport validate_box_widths(const std::vector<std::pair<int, int>>& length_width_pairs,
                                        double flag_threshold = 0.5);

// ---- file formats ----

std::vector<CardRecord> read_detector_records(const std::filesystem::path& path);
void write_detector_records(const std::filesystem::path& path, const std::vector<CardRecord>& records);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

// ---- synthetic record cards (desk-scale stand-in for the scanned archive) ----

struct SynthConfig {
    int card_width = 420;
    int card_height = 300;
    double noise_stddev = 2.0;   // per-pixel background noise
    int max_speckles = 0;        // dark blobs scattered anywhere (noisy renders)
    int max_decoys = 2;          // extra text blocks outside the upper-left quarter
    bool ruled_lines = true;
};

struct SyntheticCard {
    Image image;
    BBox lemma_box;  // tight bounds of the rendered lemma ink
    std::vector<BBox> decoy_boxes;
    std::string lemma;
};

// Deterministic per (lemma, style_seed, config). The lemma lands in the
// upper-left quarter; decoys land elsewhere. Throws ValidationError when the
// lemma contains a character outside the glyph set.
SyntheticCard generate_card(const std::string& lemma, std::uint64_t style_seed, const SynthConfig& cfg = {});

// The (image, ground-truth box) view of generate_card.
std::pair<Image, BBox> generate_synthetic_card(const std::string& lemma, std::uint64_t style_seed,
                                               const SynthConfig& cfg = {});

// Distinct pseudo-Latin lemmas for synthetic corpora, deterministic per seed.
std::vector<std::string> sample_lemmas(int count, std::uint64_t seed);

}  // namespace lemmarec::data
