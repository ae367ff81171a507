#include "lemmarec/train.hpp"

#include <fstream>

namespace lemmarec::train {

nlohmann::ordered_json TrainConfig::to_json() const {
    nlohmann::ordered_json j;
    j["regime"] = regime;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["learning_rate"] = learning_rate;
    j["weight_decay"] = weight_decay;
    j["beta1"] = beta1;
    j["beta2"] = beta2;
    j["eps"] = eps;
    j["seed"] = seed;
    if (augment) {
        nlohmann::ordered_json a;
        a["pipeline_probabilities"] = augment->pipeline_probabilities;
        a["enable_masking"] = augment->enable_masking;
        a["enable_rotation"] = augment->enable_rotation;
        a["enable_color"] = augment->enable_color;
        a["rotation_range_deg"] = {augment->rotation_min_deg, augment->rotation_max_deg};
        a["blur_radius_range"] = {augment->blur_radius_min, augment->blur_radius_max};
        a["sharpness_range"] = {augment->sharpness_min, augment->sharpness_max};
        a["brightness_range"] = {augment->brightness_min, augment->brightness_max};
        a["contrast_range"] = {augment->contrast_min, augment->contrast_max};
        a["saturation_range"] = {augment->saturation_min, augment->saturation_max};
        a["hue_range"] = {augment->hue_min, augment->hue_max};
        a["mask_count_range"] = {augment->mask_count_min, augment->mask_count_max};
        a["mask_area_range"] = {augment->mask_area_min, augment->mask_area_max};
        j["augment"] = std::move(a);
    }
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.regime = j.value("regime", cfg.regime);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.eps = j.value("eps", cfg.eps);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("augment")) {
        const auto& a = j.at("augment");
        aug::AugmentConfig ac;
        if (a.contains("preset")) ac = aug::AugmentConfig::preset(a.at("preset").get<std::string>());
        if (a.contains("pipeline_probabilities")) {
            ac.pipeline_probabilities = a.at("pipeline_probabilities").get<std::array<double, 3>>();
        }
        ac.enable_masking = a.value("enable_masking", ac.enable_masking);
        ac.enable_rotation = a.value("enable_rotation", ac.enable_rotation);
        ac.enable_color = a.value("enable_color", ac.enable_color);
        auto range = [&](const char* key, double& lo, double& hi) {
            if (a.contains(key)) {
                const auto r = a.at(key).get<std::array<double, 2>>();
                lo = r[0];
                hi = r[1];
            }
        };
        range("rotation_range_deg", ac.rotation_min_deg, ac.rotation_max_deg);
        range("blur_radius_range", ac.blur_radius_min, ac.blur_radius_max);
        range("sharpness_range", ac.sharpness_min, ac.sharpness_max);
        range("brightness_range", ac.brightness_min, ac.brightness_max);
        range("contrast_range", ac.contrast_min, ac.contrast_max);
        range("saturation_range", ac.saturation_min, ac.saturation_max);
        range("hue_range", ac.hue_min, ac.hue_max);
        if (a.contains("mask_count_range")) {
            const auto r = a.at("mask_count_range").get<std::array<int, 2>>();
            ac.mask_count_min = r[0];
            ac.mask_count_max = r[1];
        }
        range("mask_area_range", ac.mask_area_min, ac.mask_area_max);
        cfg.augment = ac;
    }
    return cfg;
}

void write_train_log(const std::filesystem::path& path, const TrainLog& log) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write train log: " + path.string());
    if (!log.config_snapshot.empty()) {
        nlohmann::ordered_json j;
        j["config"] = nlohmann::json::parse(log.config_snapshot);
        out << j.dump() << "\n";
    }
    for (const auto& e : log.epochs) {
        nlohmann::ordered_json j;
        j["epoch"] = e.epoch;
        j["mean_loss"] = e.mean_loss;
        j["wall_seconds"] = e.wall_seconds;
        if (e.cer) j["cer"] = *e.cer;
        out << j.dump() << "\n";
    }
}

std::vector<std::size_t> shuffle_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(lemmarec::detail::mix64(lemmarec::detail::mix64(seed ^ 0x0e9ac4ULL) ^ epoch));
    for (std::size_t i = n; i-- > 1;) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
        std::swap(order[i], order[j]);
    }
    return order;
}

std::vector<int> encode_target(const bpe::Vocab& vocab, const std::string& label, std::size_t max_target_length) {
    std::vector<int> ids{bpe::kBosId};
    for (int id : vocab.encode(label)) ids.push_back(id);
    ids.push_back(bpe::kEosId);
    if (ids.size() > max_target_length) {
        throw ValidationError("label '" + label + "' tokenizes to " + std::to_string(ids.size()) +
                              " ids, above max target length " + std::to_string(max_target_length));
    }
    return ids;
}

std::vector<LabeledImage> load_split(const data::DatasetManifest& manifest, const std::filesystem::path& image_root,
                                     data::Split split) {
    std::vector<LabeledImage> out;
    std::size_t index = 0;
    for (const auto& entry : manifest.entries) {
        if (entry.split != split) continue;
        std::filesystem::path p(entry.path);
        if (p.is_relative()) p = image_root / p;
        out.push_back({read_ppm(p), entry.label, index});
        ++index;
    }
    return out;
}

}  // namespace lemmarec::train
