#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "lemmarec/cli.hpp"

using namespace lemmarec;

int main(int argc, char** argv) {
    CLI::App app{"lemmarec: handwritten lemma recognition pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    app.add_option("--config", config_path, "run configuration file (JSON)")->capture_default_str();
    app.add_option("--seed", seed_override, "override the config seed everywhere");

    auto load_cfg = [&]() {
        cli::RunConfig cfg = cli::load_run_config(std::filesystem::path(config_path));
        cfg.apply_seed_override(seed_override);
        return cfg;
    };

    // synth
    cli::SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic record cards with detector boxes");
    synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
    synth_cmd->add_option("--count", synth.count, "number of cards")->capture_default_str();
    synth_cmd->add_option("--lemma-pool", synth.lemma_pool, "distinct lemmas to draw from (0 = auto)");
    synth_cmd->add_option("--lemma-file", synth.lemma_file, "file with one lemma per line");

    // prepare
    cli::PrepareArgs prepare;
    auto* prepare_cmd = app.add_subcommand("prepare", "select boxes, cut crops, split and write the manifest");
    prepare_cmd->add_option("--detector", prepare.detector_file, "detector output (JSONL)")->required();
    prepare_cmd->add_option("--images-dir", prepare.images_dir, "root directory of the card images")->required();
    prepare_cmd->add_option("--out", prepare.out_dir, "output directory")->required();

    // train
    cli::TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "train the recognizer on a manifest");
    train_cmd->add_option("--manifest", train.manifest, "dataset manifest (JSONL)")->required();
    train_cmd->add_option("--out", train.out_dir, "output directory")->required();
    train_cmd->add_option("--tokenizer", train.tokenizer, "tokenizer file (loaded if present, trained otherwise)");
    train_cmd->add_option("--init-decoder", train.init_decoder, "decoder checkpoint from pretrain");
    std::string preset;
    train_cmd->add_option("--augment-preset", preset, "full | no-masking | no-rotation | no-color");

    // pretrain
    cli::PretrainArgs pretrain;
    auto* pretrain_cmd = app.add_subcommand("pretrain", "pre-train the decoder on the lemma corpus");
    pretrain_cmd->add_option("--manifest", pretrain.manifest, "manifest supplying train-split lemmas");
    pretrain_cmd->add_option("--corpus", pretrain.corpus_file, "alternative corpus file, one lemma per line");
    pretrain_cmd->add_option("--out", pretrain.out_dir, "output directory")->required();
    pretrain_cmd->add_option("--tokenizer", pretrain.tokenizer, "tokenizer file (loaded if present, trained otherwise)");

    // predict
    cli::PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "beam-search transcriptions for a manifest split");
    predict_cmd->add_option("--checkpoint", predict.checkpoint, "model checkpoint")->required();
    predict_cmd->add_option("--tokenizer", predict.tokenizer, "tokenizer file")->required();
    predict_cmd->add_option("--manifest", predict.manifest, "dataset manifest")->required();
    predict_cmd->add_option("--image-root", predict.image_root, "root for relative crop paths");
    predict_cmd->add_option("--out", predict.out_file, "predictions file (JSONL)")->required();
    predict_cmd->add_option("--split", predict.split, "train | test")->capture_default_str();

    // evaluate
    cli::EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "CER metrics for a predictions file");
    evaluate_cmd->add_option("--predictions", evaluate.predictions, "predictions file (JSONL)")->required();
    evaluate_cmd->add_option("--manifest", evaluate.manifest, "dataset manifest")->required();
    evaluate_cmd->add_option("--split", evaluate.split, "train | test")->capture_default_str();
    evaluate_cmd->add_option("--out", evaluate.out_file, "report file (JSON)")->required();

    // compare
    cli::CompareArgs compare;
    auto* compare_cmd = app.add_subcommand("compare", "compare our predictions against an external system");
    compare_cmd->add_option("--ours", compare.ours, "our predictions (JSONL)")->required();
    compare_cmd->add_option("--external", compare.external, "external predictions (JSONL)")->required();
    compare_cmd->add_option("--manifest", compare.manifest, "dataset manifest")->required();
    compare_cmd->add_option("--split", compare.split, "train | test")->capture_default_str();
    compare_cmd->add_option("--out", compare.out_dir, "output directory")->required();

    // report
    cli::ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "full evaluation report plus distribution table");
    report_cmd->add_option("--predictions", report.predictions, "predictions file (JSONL)")->required();
    report_cmd->add_option("--manifest", report.manifest, "dataset manifest")->required();
    report_cmd->add_option("--split", report.split, "train | test")->capture_default_str();
    report_cmd->add_option("--out", report.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            synth.cfg = load_cfg();
            return cli::cmd_synth(synth);
        }
        if (prepare_cmd->parsed()) {
            prepare.cfg = load_cfg();
            return cli::cmd_prepare(prepare);
        }
        if (train_cmd->parsed()) {
            train.cfg = load_cfg();
            if (!preset.empty()) train.augment_preset = preset;
            return cli::cmd_train(train);
        }
        if (pretrain_cmd->parsed()) {
            pretrain.cfg = load_cfg();
            return cli::cmd_pretrain(pretrain);
        }
        if (predict_cmd->parsed()) {
            predict.cfg = load_cfg();
            return cli::cmd_predict(predict);
        }
        if (evaluate_cmd->parsed()) return cli::cmd_evaluate(evaluate);
        if (compare_cmd->parsed()) return cli::cmd_compare(compare);
        if (report_cmd->parsed()) return cli::cmd_report(report);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitRuntime;
    }
    return cli::kExitRuntime;
}
