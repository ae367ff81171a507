#include "lemmarec/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "lemmarec/augment.hpp"
#include "lemmarec/decode.hpp"
#include "lemmarec/eval.hpp"
#include "lemmarec/text.hpp"

namespace lemmarec::cli {

namespace {

// Commands run under this guard so exit codes stay consistent: bad inputs and
// configs exit 2, runtime failures exit 1.
template <class Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return kExitOk;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::vector<std::pair<std::string, std::string>> read_predictions(const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        try {
            const auto j = nlohmann::json::parse(line);
            out.emplace_back(j.at("id").get<std::string>(), j.at("text").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("bad prediction record at " + path.string() + ":" + std::to_string(line_no) + ": " +
                                  e.what());
        }
    }
    return out;
}

void write_predictions(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& preds) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write predictions: " + path.string());
    for (const auto& [id, text] : preds) {
        nlohmann::ordered_json j;
        j["id"] = id;
        j["text"] = text;
        out << j.dump() << "\n";
    }
}

data::Split parse_split(const std::string& split) {
    if (split == "train") return data::Split::train;
    if (split == "test") return data::Split::test;
    throw ConfigError("unknown split '" + split + "' (expected train or test)");
}

std::vector<std::pair<std::string, std::string>> labels_for_split(const data::DatasetManifest& manifest,
                                                                  data::Split split) {
    std::vector<std::pair<std::string, std::string>> labels;
    for (const auto& e : manifest.entries) {
        if (e.split == split) labels.emplace_back(sample_id(e.path), e.label);
    }
    if (labels.empty()) throw ValidationError("manifest has no entries in the requested split");
    return labels;
}

nlohmann::ordered_json report_to_json(const eval::EvalReport& r) {
    nlohmann::ordered_json j;
    j["num_samples"] = r.num_samples;
    j["mean_cer"] = r.mean_cer;
    j["weighted_cer"] = r.weighted_cer;
    j["exact_match"] = r.exact_match;
    j["cer_min"] = r.cer_min;
    j["cer_q1"] = r.cer_q1;
    j["cer_median"] = r.cer_median;
    j["cer_q3"] = r.cer_q3;
    j["cer_max"] = r.cer_max;
    j["cer_stddev"] = r.cer_stddev;
    auto buckets = [](const std::vector<eval::BucketStat>& stats) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& b : stats) {
            nlohmann::ordered_json e;
            e["bucket"] = b.name;
            e["count"] = b.count;
            e["mean_cer"] = b.mean_cer;
            arr.push_back(std::move(e));
        }
        return arr;
    };
    j["by_length"] = buckets(r.by_length);
    j["by_frequency"] = buckets(r.by_frequency);
    return j;
}

void write_report(const std::filesystem::path& path, const eval::EvalReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write report: " + path.string());
    out << report_to_json(report).dump(2) << "\n";
}

void write_distribution_csv(const std::filesystem::path& path, const std::vector<eval::DistributionRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write distribution table: " + path.string());
    out << "system,id,cer\n";
    for (const auto& r : rows) {
        out << r.system << "," << r.id << "," << nlohmann::json(r.cer).dump() << "\n";
    }
}

bpe::Vocab obtain_tokenizer(const std::filesystem::path& requested, const std::filesystem::path& out_dir,
                            const std::vector<std::string>& labels, int vocab_size) {
    if (!requested.empty() && std::filesystem::exists(requested)) {
        std::cout << "loading tokenizer from " << requested << "\n";
        return bpe::Vocab::load(requested);
    }
    if (labels.empty()) throw ValidationError("cannot train a tokenizer: no labels available");
    std::cout << "training byte-level BPE tokenizer (target vocab " << vocab_size << ") on " << labels.size()
              << " labels\n";
    const bpe::Vocab vocab = bpe::train_bpe(labels, vocab_size);
    const auto path = requested.empty() ? out_dir / "tokenizer.txt" : requested;
    vocab.save(path);
    std::cout << "tokenizer saved to " << path << "\n";
    return vocab;
}

std::vector<std::string> train_labels_of(const data::DatasetManifest& manifest) {
    std::vector<std::string> labels;
    for (const auto& e : manifest.entries) {
        if (e.split == data::Split::train) labels.push_back(e.label);
    }
    return labels;
}

}  // namespace

std::string sample_id(const std::string& path) { return std::filesystem::path(path).stem().string(); }

int cmd_synth(const SynthArgs& args) {
    return guarded([&] {
        if (args.count < 1) throw ConfigError("synth count must be >= 1");
        std::filesystem::create_directories(args.out_dir / "cards");

        std::vector<std::string> pool;
        if (!args.lemma_file.empty()) {
            for (auto& line : read_lines(args.lemma_file)) pool.push_back(text::nfc_normalize(line));
            if (pool.empty()) throw ValidationError("lemma file is empty: " + args.lemma_file.string());
        } else {
            const int n = args.lemma_pool > 0 ? args.lemma_pool : std::min(args.count, 500);
            pool = data::sample_lemmas(n, args.cfg.seed);
        }

        std::vector<data::CardRecord> records;
        std::ofstream gt(args.out_dir / "ground_truth.jsonl", std::ios::trunc);
        if (!gt) throw IoError("cannot write ground truth file");
        for (int i = 0; i < args.count; ++i) {
            Rng pick(detail::mix64(args.cfg.seed ^ 0xca9d5ULL) + static_cast<std::uint64_t>(i));
            const auto& lemma = pool[static_cast<std::size_t>(pick.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
            const auto card = data::generate_card(lemma, args.cfg.seed * 7919 + static_cast<std::uint64_t>(i), args.cfg.synth);

            char name[32];
            std::snprintf(name, sizeof(name), "card_%05d.ppm", i);
            const auto image_path = args.out_dir / "cards" / name;
            write_ppm(image_path, card.image);

            data::CardRecord record;
            record.image_path = std::string("cards/") + name;
            record.label = card.lemma;
            record.candidate_boxes = card.decoy_boxes;
            // deterministic insertion point for the true box among the decoys
            const auto slot = static_cast<std::size_t>(pick.uniform_int(0, static_cast<std::int64_t>(record.candidate_boxes.size())));
            record.candidate_boxes.insert(record.candidate_boxes.begin() + static_cast<std::ptrdiff_t>(slot),
                                          card.lemma_box);
            records.push_back(std::move(record));

            nlohmann::ordered_json j;
            j["image_path"] = std::string("cards/") + name;
            j["label"] = card.lemma;
            j["box"] = {card.lemma_box.x0, card.lemma_box.y0, card.lemma_box.x1, card.lemma_box.y1};
            gt << j.dump() << "\n";
        }
        data::write_detector_records(args.out_dir / "detector.jsonl", records);
        std::cout << "wrote " << args.count << " cards, detector.jsonl and ground_truth.jsonl under " << args.out_dir
                  << "\n";
    });
}

int cmd_prepare(const PrepareArgs& args) {
    return guarded([&] {
        auto records = data::read_detector_records(args.detector_file);
        if (records.empty()) throw ValidationError("detector output is empty: " + args.detector_file.string());
        std::filesystem::create_directories(args.out_dir / "crops");

        std::ofstream skipped(args.out_dir / "skipped.jsonl", std::ios::trunc);
        if (!skipped) throw IoError("cannot write skipped report");
        auto skip = [&](const std::string& image_path, const std::string& reason) {
            nlohmann::ordered_json j;
            j["image_path"] = image_path;
            j["reason"] = reason;
            skipped << j.dump() << "\n";
        };

        std::vector<std::pair<std::string, std::string>> entries;
        std::vector<std::pair<int, int>> length_width;
        std::set<std::string> used_names;
        std::size_t skip_count = 0;
        for (auto& record : records) {
            try {
                const Image card = read_ppm(args.images_dir / record.image_path);
                record.image_width = card.width;
                record.image_height = card.height;
                const auto box = data::select_lemma_box(record.candidate_boxes, card.width, card.height);
                if (!box) {
                    skip(record.image_path, "no qualifying box in the upper-left quarter");
                    ++skip_count;
                    continue;
                }
                const Image crop = data::extract_crop(card, *box);
                std::string stem = sample_id(record.image_path);
                for (int suffix = 2; !used_names.insert(stem).second; ++suffix) {
                    stem = sample_id(record.image_path) + "_" + std::to_string(suffix);
                }
                const auto crop_name = stem + "_crop.ppm";
                write_ppm(args.out_dir / "crops" / crop_name, crop);
                entries.emplace_back("crops/" + crop_name, record.label);
                length_width.emplace_back(static_cast<int>(text::count_code_points(record.label)), box->width());
            } catch (const Error& e) {
                skip(record.image_path, e.what());
                ++skip_count;
            }
        }
        if (entries.empty()) throw ValidationError("every record was skipped; nothing to put in the manifest");

        const auto manifest = data::split_dataset(entries, args.cfg.train_fraction, args.cfg.seed);
        data::write_manifest(args.out_dir / "manifest.jsonl", manifest);

        nlohmann::ordered_json bv;
        if (length_width.size() >= 10) {
            const auto report = data::validate_box_widths(length_width, args.cfg.box_flag_threshold);
            bv["pearson_r"] = report.pearson_r;
            bv["flagged"] = report.flagged;
            nlohmann::ordered_json quartiles;
            for (const auto& [len, q] : report.width_quartiles_by_length) {
                quartiles[std::to_string(len)] = {{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}};
            }
            bv["width_quartiles_by_length"] = std::move(quartiles);
            if (report.flagged) {
                std::cout << "warning: box width / label length correlation " << report.pearson_r
                          << " is below the threshold " << args.cfg.box_flag_threshold << "\n";
            }
        } else {
            bv["skipped"] = "fewer than 10 records with boxes";
        }
        std::ofstream bv_out(args.out_dir / "box_validation.json", std::ios::trunc);
        bv_out << bv.dump(2) << "\n";

        std::cout << "manifest: " << manifest.count(data::Split::train) << " train / "
                  << manifest.count(data::Split::test) << " test entries; skipped " << skip_count << " records\n";
    });
}

int cmd_train(const TrainArgs& args) {
    return guarded([&] {
        RunConfig cfg = args.cfg;
        std::filesystem::create_directories(args.out_dir);
        const auto manifest = data::read_manifest(args.manifest);
        const auto image_root = args.manifest.parent_path();

        const bpe::Vocab vocab =
            obtain_tokenizer(args.tokenizer, args.out_dir, train_labels_of(manifest), cfg.tokenizer_vocab_size);

        if (args.augment_preset) cfg.train.augment = aug::AugmentConfig::preset(*args.augment_preset);
        if (cfg.train.regime == "augmented" && !cfg.train.augment) cfg.train.augment = aug::AugmentConfig{};

        auto model = models::Recognizer<float>::init(cfg.model, cfg.processor, cfg.seed);
        if (!args.init_decoder.empty()) {
            train::load_decoder_params(model, args.init_decoder, vocab.hash());
            std::cout << "initialized decoder from " << args.init_decoder << "\n";
        }

        const auto log = train::train_recognizer(manifest, image_root, model, vocab, cfg.train);
        for (const auto& e : log.epochs) {
            std::cout << "epoch " << e.epoch << ": mean loss " << e.mean_loss << " (" << e.wall_seconds << "s)\n";
        }
        models::save_checkpoint(model, args.out_dir / "model.ckpt", vocab.hash());
        train::write_train_log(args.out_dir / "train_log.jsonl", log);
        std::cout << "checkpoint saved to " << (args.out_dir / "model.ckpt") << "\n";
    });
}

int cmd_pretrain(const PretrainArgs& args) {
    return guarded([&] {
        RunConfig cfg = args.cfg;
        std::filesystem::create_directories(args.out_dir);

        std::vector<std::string> corpus;
        if (!args.corpus_file.empty()) {
            for (auto& line : read_lines(args.corpus_file)) corpus.push_back(text::nfc_normalize(line));
        } else {
            corpus = train_labels_of(data::read_manifest(args.manifest));
        }
        if (corpus.empty()) throw ValidationError("pre-training corpus is empty");

        const bpe::Vocab vocab = obtain_tokenizer(args.tokenizer, args.out_dir, corpus, cfg.tokenizer_vocab_size);

        Rng rng(detail::mix64(cfg.seed ^ 0x5eed0001ULL));
        auto decoder = models::GptDecoder<float>::init(cfg.model, rng);
        cfg.train.regime = "pretrain_decoder";
        const auto log = train::pretrain_decoder(corpus, decoder, vocab, cfg.train);
        for (const auto& e : log.epochs) {
            std::cout << "epoch " << e.epoch << ": mean loss " << e.mean_loss << " (" << e.wall_seconds << "s)\n";
        }
        train::save_decoder_checkpoint(decoder, cfg.model, args.out_dir / "decoder.ckpt", vocab.hash());
        train::write_train_log(args.out_dir / "pretrain_log.jsonl", log);
        std::cout << "decoder checkpoint saved to " << (args.out_dir / "decoder.ckpt") << "\n";
    });
}

int cmd_predict(const PredictArgs& args) {
    return guarded([&] {
        const auto split = parse_split(args.split);
        const bpe::Vocab vocab = bpe::Vocab::load(args.tokenizer);
        auto model = models::load_checkpoint<float>(args.checkpoint, args.cfg.processor, std::nullopt, vocab.hash());
        if (args.cfg.generation.max_length > model.config.max_target_length) {
            throw ConfigError("generation max_length " + std::to_string(args.cfg.generation.max_length) +
                              " exceeds the model's max_target_length " +
                              std::to_string(model.config.max_target_length));
        }
        const auto manifest = data::read_manifest(args.manifest);
        const auto image_root = args.image_root.empty() ? args.manifest.parent_path() : args.image_root;

        NoGradGuard no_grad;
        std::vector<std::pair<std::string, std::string>> predictions;
        for (const auto& entry : manifest.entries) {
            if (entry.split != split) continue;
            std::filesystem::path p(entry.path);
            if (p.is_relative()) p = image_root / p;
            const Image crop = read_ppm(p);
            const auto batch = models::preprocess_batch<float>({crop}, model.processor);
            const auto memory = model.encode_images(batch);
            decode::RecognizerScorer<float> scorer(model, memory);
            predictions.emplace_back(sample_id(entry.path), decode::beam_search(scorer, vocab, args.cfg.generation));
        }
        if (predictions.empty()) throw ValidationError("manifest has no entries in split '" + args.split + "'");
        write_predictions(args.out_file, predictions);
        std::cout << "wrote " << predictions.size() << " predictions to " << args.out_file << "\n";
    });
}

int cmd_evaluate(const EvaluateArgs& args) {
    return guarded([&] {
        const auto manifest = data::read_manifest(args.manifest);
        const auto labels = labels_for_split(manifest, parse_split(args.split));
        const auto predictions = read_predictions(args.predictions);

        std::map<std::string, std::string> by_id(predictions.begin(), predictions.end());
        std::vector<eval::Pair> pairs;
        std::string missing;
        for (const auto& [id, label] : labels) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                missing += " " + id;
                continue;
            }
            pairs.push_back({id, it->second, label});
        }
        if (!missing.empty()) throw ValidationError("predictions missing for ids:" + missing);

        const auto report = eval::evaluate_pairs(pairs);
        write_report(args.out_file, report);
        std::cout << "samples " << report.num_samples << "  mean CER " << report.mean_cer << "  weighted CER "
                  << report.weighted_cer << "  exact match " << report.exact_match << "\n";
    });
}

int cmd_compare(const CompareArgs& args) {
    return guarded([&] {
        const auto manifest = data::read_manifest(args.manifest);
        const auto labels = labels_for_split(manifest, parse_split(args.split));
        const auto result = eval::compare_systems(read_predictions(args.ours), read_predictions(args.external), labels);

        std::filesystem::create_directories(args.out_dir);
        write_report(args.out_dir / "ours_report.json", result.ours);
        write_report(args.out_dir / "external_report.json", result.external);
        write_distribution_csv(args.out_dir / "distribution.csv", result.distribution);
        std::cout << "ours:     mean CER " << result.ours.mean_cer << "  weighted CER " << result.ours.weighted_cer
                  << "  exact match " << result.ours.exact_match << "\n";
        std::cout << "external: mean CER " << result.external.mean_cer << "  weighted CER "
                  << result.external.weighted_cer << "  exact match " << result.external.exact_match << "\n";
    });
}

int cmd_report(const ReportArgs& args) {
    return guarded([&] {
        const auto manifest = data::read_manifest(args.manifest);
        const auto labels = labels_for_split(manifest, parse_split(args.split));
        const auto predictions = read_predictions(args.predictions);

        std::map<std::string, std::string> by_id(predictions.begin(), predictions.end());
        std::vector<eval::Pair> pairs;
        std::string missing;
        for (const auto& [id, label] : labels) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                missing += " " + id;
                continue;
            }
            pairs.push_back({id, it->second, label});
        }
        if (!missing.empty()) throw ValidationError("predictions missing for ids:" + missing);

        const auto report = eval::evaluate_pairs(pairs);
        std::filesystem::create_directories(args.out_dir);
        write_report(args.out_dir / "report.json", report);
        std::vector<eval::DistributionRow> rows;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            rows.push_back({"ours", pairs[i].id, report.per_example_cer[i]});
        }
        write_distribution_csv(args.out_dir / "distribution.csv", rows);
        std::cout << "report and distribution table written under " << args.out_dir << "\n";
    });
}

}  // namespace lemmarec::cli
