#include "lemmarec/dataprep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lemmarec/errors.hpp"
#include "lemmarec/rng.hpp"
#include "lemmarec/text.hpp"

namespace lemmarec::data {

void validate_box(const BBox& box, int image_width, int image_height) {
    if (box.x0 < 0 || box.y0 < 0 || box.x0 >= box.x1 || box.y0 >= box.y1 || box.x1 > image_width ||
        box.y1 > image_height) {
        throw ValidationError("invalid box (" + std::to_string(box.x0) + "," + std::to_string(box.y0) + "," +
                              std::to_string(box.x1) + "," + std::to_string(box.y1) + ") for " +
                              std::to_string(image_width) + "x" + std::to_string(image_height) + " image");
    }
}

std::int64_t DatasetManifest::count(Split s) const {
    return std::count_if(entries.begin(), entries.end(), [s](const ManifestEntry& e) { return e.split == s; });
}

std::optional<BBox> select_lemma_box(const std::vector<BBox>& boxes, int image_width, int image_height) {
    const double half_w = 0.5 * image_width;
    const double half_h = 0.5 * image_height;
    std::optional<BBox> best;
    for (const auto& box : boxes) {
        validate_box(box, image_width, image_height);
        if (box.center_x() >= half_w || box.center_y() >= half_h) continue;
        if (!best) {
            best = box;
            continue;
        }
        const auto candidate = std::make_tuple(-box.area(), box.y0, box.x0, box.y1, box.x1);
        const auto incumbent = std::make_tuple(-best->area(), best->y0, best->x0, best->y1, best->x1);
        if (candidate < incumbent) best = box;
    }
    return best;
}

Image extract_crop(const Image& card, const BBox& box) {
    validate_box(box, card.width, card.height);
    Image crop(box.width(), box.height());
    for (int y = 0; y < crop.height; ++y) {
        const std::uint8_t* src = card.at(box.x0, box.y0 + y);
        std::uint8_t* dst = crop.at(0, y);
        std::copy(src, src + static_cast<std::size_t>(crop.width) * 3, dst);
    }
    return crop;
}

DatasetManifest split_dataset(const std::vector<std::pair<std::string, std::string>>& entries, double train_fraction,
                              std::uint64_t seed) {
    if (entries.empty()) throw ValidationError("cannot split an empty entry list");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("train fraction must lie strictly between 0 and 1");
    }

    std::vector<std::size_t> order(entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
        std::swap(order[i], order[j]);
    }

    const auto train_count =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(entries.size()) + 1e-9));

    DatasetManifest manifest;
    manifest.split_seed = seed;
    manifest.train_fraction = train_fraction;
    manifest.entries.reserve(entries.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto& [path, label] = entries[order[rank]];
        manifest.entries.push_back({path, text::nfc_normalize(label), rank < train_count ? Split::train : Split::test});
    }
    return manifest;
}

namespace {

Quartiles quartiles_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
    };
    return {q(0.25), q(0.5), q(0.75)};
}

}  // namespace

BoxValidationReport validate_box_widths(const std::vector<std::pair<int, int>>& length_width_pairs,
                                        double flag_threshold) {
    if (length_width_pairs.size() < 10) {
        throw ValidationError("box-width validation needs at least 10 records, got " +
                              std::to_string(length_width_pairs.size()));
    }

    const auto n = static_cast<double>(length_width_pairs.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [len, width] : length_width_pairs) {
        mean_x += len;
        mean_y += width;
    }
    mean_x /= n;
    mean_y /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    std::map<int, std::vector<double>> widths_by_length;
    for (const auto& [len, width] : length_width_pairs) {
        const double dx = len - mean_x;
        const double dy = width - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
        widths_by_length[len].push_back(width);
    }

    BoxValidationReport report;
    report.pearson_r = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    report.flagged = report.pearson_r < flag_threshold;
    for (auto& [len, widths] : widths_by_length) report.width_quartiles_by_length[len] = quartiles_of(widths);
    return report;
}

// ---- file formats ----

std::vector<CardRecord> read_detector_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open detector output: " + path.string());
    std::vector<CardRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("bad detector record at line " + std::to_string(line_no) + ": " + e.what());
        }
        CardRecord record;
        record.image_path = j.at("image_path").get<std::string>();
        record.label = text::nfc_normalize(j.at("label").get<std::string>());
        if (record.label.empty()) {
            throw ValidationError("empty label at detector line " + std::to_string(line_no));
        }
        for (const auto& b : j.at("boxes")) {
            if (!b.is_array() || b.size() != 4) {
                throw ValidationError("box must be [x0,y0,x1,y1] at detector line " + std::to_string(line_no));
            }
            record.candidate_boxes.push_back({b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()});
        }
        records.push_back(std::move(record));
    }
    return records;
}

void write_detector_records(const std::filesystem::path& path, const std::vector<CardRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write detector output: " + path.string());
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["image_path"] = r.image_path;
        auto boxes = nlohmann::ordered_json::array();
        for (const auto& b : r.candidate_boxes) boxes.push_back({b.x0, b.y0, b.x1, b.y1});
        j["boxes"] = std::move(boxes);
        j["label"] = r.label;
        out << j.dump() << "\n";
    }
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    for (const auto& e : manifest.entries) {
        nlohmann::ordered_json j;
        j["path"] = e.path;
        j["label"] = e.label;
        j["split"] = e.split == Split::train ? "train" : "test";
        out << j.dump() << "\n";
    }
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    DatasetManifest manifest;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("bad manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string split = j.at("split").get<std::string>();
        if (split != "train" && split != "test") {
            throw ValidationError("unknown split '" + split + "' at manifest line " + std::to_string(line_no));
        }
        manifest.entries.push_back({j.at("path").get<std::string>(),
                                    text::nfc_normalize(j.at("label").get<std::string>()),
                                    split == "train" ? Split::train : Split::test});
    }
    return manifest;
}

}  // namespace lemmarec::data
