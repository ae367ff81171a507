#include "lemmarec/runconfig.hpp"

#include <fstream>

namespace lemmarec::cli {

void RunConfig::apply_seed_override(std::optional<std::uint64_t> seed_override) {
    if (seed_override) seed = *seed_override;
    train.seed = seed;
}

namespace {

template <class Fn>
auto in_section(const char* section, Fn&& fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config section '") + section + "': " + e.what());
    } catch (const Error&) {
        throw;
    }
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    RunConfig cfg;
    cfg.processor.target_size = cfg.model.image_size;
    if (path.empty()) {
        cfg.apply_seed_override(std::nullopt);
        return cfg;
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }

    if (j.contains("seed")) {
        cfg.seed = in_section("seed", [&] { return j.at("seed").get<std::uint64_t>(); });
    }
    if (j.contains("dataprep")) {
        in_section("dataprep", [&] {
            const auto& d = j.at("dataprep");
            cfg.train_fraction = d.value("train_fraction", cfg.train_fraction);
            cfg.box_flag_threshold = d.value("box_flag_threshold", cfg.box_flag_threshold);
            return 0;
        });
        if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
            throw ConfigError("config section 'dataprep': train_fraction must lie strictly between 0 and 1");
        }
    }
    if (j.contains("tokenizer")) {
        in_section("tokenizer", [&] {
            cfg.tokenizer_vocab_size = j.at("tokenizer").value("vocab_size", cfg.tokenizer_vocab_size);
            return 0;
        });
    }
    if (j.contains("synth")) {
        in_section("synth", [&] {
            const auto& s = j.at("synth");
            cfg.synth.card_width = s.value("card_width", cfg.synth.card_width);
            cfg.synth.card_height = s.value("card_height", cfg.synth.card_height);
            cfg.synth.noise_stddev = s.value("noise_stddev", cfg.synth.noise_stddev);
            cfg.synth.max_speckles = s.value("max_speckles", cfg.synth.max_speckles);
            cfg.synth.max_decoys = s.value("max_decoys", cfg.synth.max_decoys);
            cfg.synth.ruled_lines = s.value("ruled_lines", cfg.synth.ruled_lines);
            return 0;
        });
    }
    if (j.contains("model")) {
        cfg.model = in_section("model", [&] { return models::ModelConfig::from_json(j.at("model")); });
    }
    if (j.contains("processor")) {
        cfg.processor = in_section("processor", [&] { return models::ImageProcessorConfig::from_json(j.at("processor")); });
    } else {
        cfg.processor.target_size = cfg.model.image_size;
    }
    if (j.contains("train")) {
        cfg.train = in_section("train", [&] { return train::TrainConfig::from_json(j.at("train")); });
    }
    if (j.contains("generation")) {
        cfg.generation = in_section("generation", [&] { return decode::GenerationConfig::from_json(j.at("generation")); });
    }
    cfg.apply_seed_override(std::nullopt);
    return cfg;
}

}  // namespace lemmarec::cli
