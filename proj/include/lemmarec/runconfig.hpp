#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "lemmarec/dataprep.hpp"
#include "lemmarec/decode.hpp"
#include "lemmarec/models.hpp"
#include "lemmarec/train.hpp"

namespace lemmarec::cli {

// One structured config file drives every command; the CLI overrides the seed
// and the augmentation preset. Absent sections fall back to defaults.
struct RunConfig {
    std::uint64_t seed = 42;

    // dataprep
    double train_fraction = 0.85;
    double box_flag_threshold = 0.5;

    // tokenizer
    int tokenizer_vocab_size = 512;

    // synth
    data::SynthConfig synth;

    models::ModelConfig model;
    models::ImageProcessorConfig processor;
    train::TrainConfig train;
    decode::GenerationConfig generation;

    void apply_seed_override(std::optional<std::uint64_t> seed_override);
};

// Empty path -> defaults. Parse errors report the offending section and key.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace lemmarec::cli
