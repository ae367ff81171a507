#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "lemmarec/runconfig.hpp"

namespace lemmarec::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

struct SynthArgs {
    std::filesystem::path out_dir;
    int count = 100;
    int lemma_pool = 0;  // 0 -> min(count, 500)
    std::filesystem::path lemma_file;  // optional, one lemma per line
    RunConfig cfg;
};

struct PrepareArgs {
    std::filesystem::path detector_file;
    std::filesystem::path images_dir;
    std::filesystem::path out_dir;
    RunConfig cfg;
};

struct TrainArgs {
    std::filesystem::path manifest;
    std::filesystem::path out_dir;
    std::filesystem::path tokenizer;      // optional: loaded when present, trained+saved otherwise
    std::filesystem::path init_decoder;   // optional decoder checkpoint
    std::optional<std::string> augment_preset;
    RunConfig cfg;
};

struct PretrainArgs {
    std::filesystem::path manifest;     // lemma corpus from the train split
    std::filesystem::path corpus_file;  // alternative: one lemma per line
    std::filesystem::path out_dir;
    std::filesystem::path tokenizer;
    RunConfig cfg;
};

struct PredictArgs {
    std::filesystem::path checkpoint;
    std::filesystem::path tokenizer;
    std::filesystem::path manifest;
    std::filesystem::path image_root;  // defaults to the manifest's directory
    std::filesystem::path out_file;
    std::string split = "test";
    RunConfig cfg;
};

struct EvaluateArgs {
    std::filesystem::path predictions;
    std::filesystem::path manifest;
    std::string split = "test";
    std::filesystem::path out_file;
};

struct CompareArgs {
    std::filesystem::path ours;
    std::filesystem::path external;
    std::filesystem::path manifest;
    std::string split = "test";
    std::filesystem::path out_dir;
};

struct ReportArgs {
    std::filesystem::path predictions;
    std::filesystem::path manifest;
    std::string split = "test";
    std::filesystem::path out_dir;
};

int cmd_synth(const SynthArgs& args);
int cmd_prepare(const PrepareArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_pretrain(const PretrainArgs& args);
int cmd_predict(const PredictArgs& args);
int cmd_evaluate(const EvaluateArgs& args);
int cmd_compare(const CompareArgs& args);
int cmd_report(const ReportArgs& args);

// `path` stem; the id that links manifests, predictions and reports.
std::string sample_id(const std::string& path);

}  // namespace lemmarec::cli
