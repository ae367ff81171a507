#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lemmarec/augment.hpp"
#include "lemmarec/dataprep.hpp"
#include "lemmarec/models.hpp"
#include "lemmarec/tokenizer.hpp"

namespace lemmarec::train {

struct TrainConfig {
    std::string regime = "standard";  // standard | augmented | pretrain_decoder
    int epochs = 0;                   // 0 -> regime default (5 / 20 / 10)
    int batch_size = 0;               // 0 -> regime default (64 / 64 / 192)
    double learning_rate = 3e-4;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 42;
    std::optional<aug::AugmentConfig> augment;

    TrainConfig resolved() const {
        TrainConfig cfg = *this;
        if (cfg.epochs == 0) cfg.epochs = regime == "augmented" ? 20 : (regime == "pretrain_decoder" ? 10 : 5);
        if (cfg.batch_size == 0) cfg.batch_size = regime == "pretrain_decoder" ? 192 : 64;
        cfg.validate();
        return cfg;
    }

    void validate() const {
        if (regime != "standard" && regime != "augmented" && regime != "pretrain_decoder") {
            throw ConfigError("unknown training regime: " + regime);
        }
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("batch size must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
        if (weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
        if (augment) augment->validate();
    }

    nlohmann::ordered_json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochRecord {
    int epoch = 0;
    double mean_loss = 0.0;
    double wall_seconds = 0.0;
    std::optional<double> cer;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
    std::string config_snapshot;
};

void write_train_log(const std::filesystem::path& path, const TrainLog& log);

// ---- optimizer ----

// Decoupled weight decay, then bias-corrected Adam. Parameters without a
// gradient buffer are treated as zero-gradient (decay still applies).
template <class S>
class AdamW {
public:
    AdamW(nn::ParamList<S> params, const TrainConfig& cfg)
        : params_(std::move(params)),
          lr_(cfg.learning_rate),
          wd_(cfg.weight_decay),
          beta1_(cfg.beta1),
          beta2_(cfg.beta2),
          eps_(cfg.eps) {
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(params_[i].tensor.size(), S(0));
            v_[i].assign(params_[i].tensor.size(), S(0));
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t p = 0; p < params_.size(); ++p) {
            auto& value = params_[p].tensor.value_mut();
            const auto& grad = params_[p].tensor.grad();
            auto& m = m_[p];
            auto& v = v_[p];
            for (std::size_t i = 0; i < value.size(); ++i) {
                const double g = grad.empty() ? 0.0 : static_cast<double>(grad[i]);
                if (!std::isfinite(g)) {
                    throw NumericError("non-finite gradient in parameter '" + params_[p].name + "' at element " +
                                       std::to_string(i));
                }
                double w = static_cast<double>(value[i]) * (1.0 - lr_ * wd_);
                const double mi = beta1_ * static_cast<double>(m[i]) + (1.0 - beta1_) * g;
                const double vi = beta2_ * static_cast<double>(v[i]) + (1.0 - beta2_) * g * g;
                m[i] = static_cast<S>(mi);
                v[i] = static_cast<S>(vi);
                w -= lr_ * (mi / bc1) / (std::sqrt(vi / bc2) + eps_);
                value[i] = static_cast<S>(w);
            }
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.tensor.zero_grad();
    }

    std::int64_t step_count() const { return t_; }
    const std::vector<std::vector<S>>& first_moments() const { return m_; }
    const std::vector<std::vector<S>>& second_moments() const { return v_; }

private:
    nn::ParamList<S> params_;
    std::vector<std::vector<S>> m_;
    std::vector<std::vector<S>> v_;
    double lr_, wd_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

// Mean negative log-likelihood over non-PAD positions; logits (B, T, V),
// targets (B, T).
template <class S>
Tensor<S> cross_entropy_loss(const Tensor<S>& logits, const IntTensor& targets, int pad_id = bpe::kPadId) {
    return cross_entropy_with_logits(logits, targets, pad_id);
}

// Deterministic epoch shuffle; a pure function of (seed, epoch, n).
std::vector<std::size_t> shuffle_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n);

// BOS + tokens + EOS; errors when the result exceeds max_target_length.
std::vector<int> encode_target(const bpe::Vocab& vocab, const std::string& label, std::size_t max_target_length);

struct LabeledImage {
    Image image;
    std::string label;
    std::size_t sample_index = 0;  // stable index used to derive per-sample rng
};

std::vector<LabeledImage> load_split(const data::DatasetManifest& manifest, const std::filesystem::path& image_root,
                                     data::Split split);

namespace detail {

// Pads batch sequences to a common length; input[t] predicts target[t].
inline void build_teacher_forcing(const std::vector<const std::vector<int>*>& ids, IntTensor& inputs,
                                  IntTensor& targets) {
    std::size_t max_len = 0;
    for (const auto* seq : ids) max_len = std::max(max_len, seq->size());
    const std::size_t t = max_len - 1;
    const std::size_t b = ids.size();
    std::vector<std::int32_t> in(b * t, bpe::kPadId);
    std::vector<std::int32_t> out(b * t, bpe::kPadId);
    for (std::size_t i = 0; i < b; ++i) {
        const auto& seq = *ids[i];
        for (std::size_t j = 0; j + 1 < seq.size(); ++j) {
            in[i * t + j] = seq[j];
            out[i * t + j] = seq[j + 1];
        }
    }
    inputs = IntTensor({b, t}, std::move(in));
    targets = IntTensor({b, t}, std::move(out));
}

}  // namespace detail

// Teacher-forced training of the full recognizer on the manifest's train
// split. Augmentation applies per sample per epoch iff regime == "augmented"
// and an augment config is present; the per-sample rng derivation keeps the
// result independent of batching and worker scheduling.
template <class S>
TrainLog train_recognizer(const data::DatasetManifest& manifest, const std::filesystem::path& image_root,
                          models::Recognizer<S>& model, const bpe::Vocab& vocab, const TrainConfig& raw_cfg) {
    const TrainConfig cfg = raw_cfg.resolved();
    if (cfg.regime == "pretrain_decoder") throw ConfigError("train_recognizer does not run the pretrain regime");
    // BPE training may stop early when no pair repeats, so the tokenizer can
    // be smaller than the model's vocab rows, never larger.
    if (static_cast<int>(vocab.size()) > model.config.vocab_size) {
        throw ConfigError("tokenizer vocab size " + std::to_string(vocab.size()) + " exceeds model vocab " +
                          std::to_string(model.config.vocab_size));
    }

    const auto samples = load_split(manifest, image_root, data::Split::train);
    if (samples.empty()) throw ValidationError("manifest has no train entries");
    std::vector<std::vector<int>> target_ids;
    target_ids.reserve(samples.size());
    for (const auto& s : samples) {
        target_ids.push_back(encode_target(vocab, s.label, static_cast<std::size_t>(model.config.max_target_length)));
    }

    const bool use_augment = cfg.regime == "augmented" && cfg.augment.has_value();
    AdamW<S> optimizer(model.parameters(), cfg);
    TrainLog log;
    log.config_snapshot = cfg.to_json().dump();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const auto order = shuffle_order(cfg.seed, static_cast<std::uint64_t>(epoch), samples.size());
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            std::vector<Image> images;
            std::vector<const std::vector<int>*> ids;
            images.reserve(end - begin);
            ids.reserve(end - begin);
            for (std::size_t k = begin; k < end; ++k) {
                const auto& sample = samples[order[k]];
                if (use_augment) {
                    const SampleRng rng(cfg.seed, sample.sample_index, static_cast<std::uint64_t>(epoch));
                    images.push_back(aug::augment_sample(sample.image, rng, *cfg.augment));
                } else {
                    images.push_back(sample.image);
                }
                ids.push_back(&target_ids[order[k]]);
            }
            const Tensor<S> batch = models::preprocess_batch<S>(images, model.processor);
            IntTensor inputs, targets;
            detail::build_teacher_forcing(ids, inputs, targets);

            Tensor<S> memory = model.encode_images(batch);
            Tensor<S> logits = model.decode_logits(memory, inputs);
            Tensor<S> loss = cross_entropy_loss(logits, targets);
            optimizer.zero_grad();
            loss.backward();
            optimizer.step();
            loss_sum += static_cast<double>(loss.item()) * static_cast<double>(end - begin);
            seen += end - begin;
        }
        EpochRecord record;
        record.epoch = epoch + 1;
        record.mean_loss = loss_sum / static_cast<double>(seen);
        record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        log.epochs.push_back(record);
    }
    return log;
}

// Causal LM pre-training of the decoder on the concatenated lemma corpus.
// Cross attention reads a single all-zero memory token, so the weights drop
// straight into the full recognizer afterwards.
template <class S>
TrainLog pretrain_decoder(const std::vector<std::string>& corpus, models::GptDecoder<S>& decoder,
                          const bpe::Vocab& vocab, const TrainConfig& raw_cfg) {
    TrainConfig base = raw_cfg;
    base.regime = "pretrain_decoder";
    const TrainConfig cfg = base.resolved();
    if (corpus.empty()) throw ValidationError("empty pre-training corpus");

    // newline-separated lemma stream, chunked into fixed windows
    std::string joined;
    for (const auto& lemma : corpus) {
        joined += lemma;
        joined += '\n';
    }
    const std::vector<int> stream = vocab.encode(joined);
    const std::size_t window = decoder.max_target_length;
    std::vector<std::vector<int>> windows;
    for (std::size_t pos = 0; pos < stream.size(); pos += window) {
        std::vector<int> w(stream.begin() + static_cast<std::ptrdiff_t>(pos),
                           stream.begin() + static_cast<std::ptrdiff_t>(std::min(stream.size(), pos + window)));
        if (w.size() >= 2) windows.push_back(std::move(w));
    }
    if (windows.empty()) throw ValidationError("corpus too small to form a training window");

    nn::ParamList<S> params;
    decoder.collect("decoder", params);
    AdamW<S> optimizer(std::move(params), cfg);
    TrainLog log;
    log.config_snapshot = cfg.to_json().dump();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const auto order = shuffle_order(cfg.seed, static_cast<std::uint64_t>(epoch), windows.size());
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            std::vector<const std::vector<int>*> ids;
            ids.reserve(end - begin);
            for (std::size_t k = begin; k < end; ++k) ids.push_back(&windows[order[k]]);
            IntTensor inputs, targets;
            detail::build_teacher_forcing(ids, inputs, targets);
            Tensor<S> memory = decoder.zero_memory(end - begin);
            Tensor<S> logits = decoder(inputs, memory);
            Tensor<S> loss = cross_entropy_loss(logits, targets);
            optimizer.zero_grad();
            loss.backward();
            optimizer.step();
            loss_sum += static_cast<double>(loss.item()) * static_cast<double>(end - begin);
            seen += end - begin;
        }
        EpochRecord record;
        record.epoch = epoch + 1;
        record.mean_loss = loss_sum / static_cast<double>(seen);
        record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        log.epochs.push_back(record);
    }
    return log;
}

// Mean per-token NLL the decoder assigns to a string in corpus context
// (preceded and followed by the newline separator).
template <class S>
double decoder_nll(const models::GptDecoder<S>& decoder, const bpe::Vocab& vocab, const std::string& text) {
    NoGradGuard no_grad;
    std::vector<int> ids = vocab.encode("\n" + text + "\n");
    if (ids.size() > decoder.max_target_length) ids.resize(decoder.max_target_length);
    if (ids.size() < 2) throw ValidationError("text too short to score");
    const std::size_t t = ids.size() - 1;
    std::vector<std::int32_t> in(t);
    std::vector<std::int32_t> out(t);
    for (std::size_t i = 0; i < t; ++i) {
        in[i] = ids[i];
        out[i] = ids[i + 1];
    }
    Tensor<S> logits = decoder(IntTensor({1, t}, std::move(in)), decoder.zero_memory(1));
    Tensor<S> loss = cross_entropy_with_logits(logits, IntTensor({1, t}, std::move(out)), bpe::kPadId);
    return static_cast<double>(loss.item());
}

// Decoder-only checkpoints produced by pre-training.
template <class S>
void save_decoder_checkpoint(const models::GptDecoder<S>& decoder, const models::ModelConfig& cfg,
                             const std::filesystem::path& path, std::uint64_t tokenizer_hash) {
    nn::ParamList<S> params;
    decoder.collect("decoder", params);
    std::vector<std::pair<std::string, const void*>> names;
    std::vector<std::pair<std::size_t, int>> sizes;
    for (const auto& p : params) {
        names.emplace_back(p.name, static_cast<const void*>(p.tensor.value().data()));
        sizes.emplace_back(p.tensor.size(), static_cast<int>(sizeof(S)));
    }
    models::write_checkpoint_blob(path, cfg.canonical_json(), tokenizer_hash, names, sizes, "", {});
}

// Copies decoder.* tensors from a checkpoint into an assembled recognizer.
template <class S>
void load_decoder_params(models::Recognizer<S>& model, const std::filesystem::path& path,
                         const std::optional<std::uint64_t>& expected_tokenizer_hash = std::nullopt) {
    const models::CheckpointRaw raw = models::read_checkpoint_raw(path);
    if (expected_tokenizer_hash && *expected_tokenizer_hash != raw.tokenizer_hash) {
        throw FormatError("decoder checkpoint tokenizer hash mismatch: refusing to load");
    }
    auto params = model.parameters();
    std::size_t loaded = 0;
    for (const auto& [name, values] : raw.params) {
        if (name.rfind("decoder.", 0) != 0) continue;
        bool found = false;
        for (auto& p : params) {
            if (p.name != name) continue;
            auto& dst = p.tensor.value_mut();
            if (dst.size() != values.size()) {
                throw FormatError("decoder tensor '" + name + "' has " + std::to_string(values.size()) +
                                  " values, model expects " + std::to_string(dst.size()));
            }
            for (std::size_t k = 0; k < values.size(); ++k) dst[k] = static_cast<S>(values[k]);
            found = true;
            ++loaded;
            break;
        }
        if (!found) throw FormatError("decoder tensor '" + name + "' does not exist in this model");
    }
    if (loaded == 0) throw FormatError("checkpoint carries no decoder tensors: " + path.string());
}

}  // namespace lemmarec::train
