#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lemmarec/image.hpp"
#include "lemmarec/nnblocks.hpp"
#include "lemmarec/tensor.hpp"

namespace lemmarec::models {

struct ModelConfig {
    std::string encoder_kind = "swin";  // "vit" | "beit" | "swin"
    int image_size = 224;
    int patch_size = 4;
    int encoder_embed_dim = 48;
    std::vector<int> encoder_depths{2, 2};
    std::vector<int> encoder_num_heads{2, 4};
    int window_size = 7;  // swin only
    int decoder_embed_dim = 96;
    int decoder_depth = 2;
    int decoder_num_heads = 4;
    int vocab_size = 512;
    int max_target_length = 32;
    double mlp_ratio = 4.0;

    static ModelConfig defaults_for(const std::string& kind) {
        ModelConfig cfg;
        cfg.encoder_kind = kind;
        if (kind == "vit" || kind == "beit") {
            cfg.patch_size = 16;
            cfg.encoder_embed_dim = 96;
            cfg.encoder_depths = {4};
            cfg.encoder_num_heads = {4};
        }
        return cfg;
    }

    void validate() const;

    int stages() const { return static_cast<int>(encoder_depths.size()); }

    int memory_dim() const {
        if (encoder_kind == "swin") return encoder_embed_dim << (stages() - 1);
        return encoder_embed_dim;
    }

    int final_grid() const {
        int grid = image_size / patch_size;
        if (encoder_kind == "swin") grid >>= (stages() - 1);
        return grid;
    }

    int memory_tokens() const {
        const int grid = final_grid();
        if (encoder_kind == "swin") return grid * grid;
        return grid * grid + 1;  // class token
    }

    nlohmann::ordered_json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
    std::string canonical_json() const { return to_json().dump(); }
};

struct ImageProcessorConfig {
    int target_size = 224;
    std::array<double, 3> mean{0.5, 0.5, 0.5};
    std::array<double, 3> std{0.5, 0.5, 0.5};
    std::string resize_filter = "bilinear";

    void validate() const {
        if (target_size <= 0) throw ConfigError("image processor target size must be positive");
        for (double s : std) {
            if (!(s > 0.0)) throw ConfigError("image processor std must be positive per channel");
        }
        if (resize_filter != "bilinear") throw ConfigError("unsupported resize filter: " + resize_filter);
    }

    nlohmann::ordered_json to_json() const;
    static ImageProcessorConfig from_json(const nlohmann::json& j);
};

// Resize to target, scale to [0, 1], channel-normalize -> (3, H, W).
template <class S>
Tensor<S> preprocess(const Image& img, const ImageProcessorConfig& cfg) {
    cfg.validate();
    if (img.width <= 0 || img.height <= 0) throw ValidationError("cannot preprocess a zero-area image");
    const Image resized = resize_bilinear(img, cfg.target_size, cfg.target_size);
    const std::size_t hw = static_cast<std::size_t>(cfg.target_size) * cfg.target_size;
    std::vector<S> out(3 * hw);
    for (std::size_t i = 0; i < hw; ++i) {
        for (int c = 0; c < 3; ++c) {
            const double v = resized.pixels[i * 3 + static_cast<std::size_t>(c)] / 255.0;
            out[static_cast<std::size_t>(c) * hw + i] = static_cast<S>((v - cfg.mean[c]) / cfg.std[c]);
        }
    }
    return Tensor<S>::from({3, static_cast<std::size_t>(cfg.target_size), static_cast<std::size_t>(cfg.target_size)},
                           std::move(out));
}

template <class S>
Tensor<S> preprocess_batch(const std::vector<Image>& images, const ImageProcessorConfig& cfg) {
    if (images.empty()) throw ValidationError("empty preprocess batch");
    const std::size_t hw3 = 3 * static_cast<std::size_t>(cfg.target_size) * cfg.target_size;
    std::vector<S> out(images.size() * hw3);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const Tensor<S> one = preprocess<S>(images[i], cfg);
        std::copy(one.value().begin(), one.value().end(), out.begin() + static_cast<std::ptrdiff_t>(i * hw3));
    }
    return Tensor<S>::from({images.size(), 3, static_cast<std::size_t>(cfg.target_size),
                            static_cast<std::size_t>(cfg.target_size)},
                           std::move(out));
}

// ---- encoders ----

template <class S>
struct VitEncoder {
    nn::PatchEmbed<S> patch_embed;
    std::vector<nn::EncoderBlock<S>> blocks;
    std::vector<Tensor<S>> rel_bias_tables;  // BEiT: one per block; empty for ViT
    IntTensor rel_index;                     // shared (T*T) index into the tables
    nn::LayerNorm<S> final_norm;
    std::size_t num_heads = 4;

    static VitEncoder init(const ModelConfig& cfg, Rng& rng) {
        const bool beit = cfg.encoder_kind == "beit";
        VitEncoder enc;
        enc.num_heads = static_cast<std::size_t>(cfg.encoder_num_heads.at(0));
        enc.patch_embed = nn::PatchEmbed<S>::init(static_cast<std::size_t>(cfg.image_size),
                                                  static_cast<std::size_t>(cfg.patch_size),
                                                  static_cast<std::size_t>(cfg.encoder_embed_dim),
                                                  /*class_token=*/true, /*absolute_position=*/!beit, rng);
        const auto dim = static_cast<std::size_t>(cfg.encoder_embed_dim);
        const auto hidden = static_cast<std::size_t>(cfg.mlp_ratio * cfg.encoder_embed_dim);
        for (int i = 0; i < cfg.encoder_depths.at(0); ++i) {
            enc.blocks.push_back(nn::EncoderBlock<S>::init(dim, hidden, rng));
        }
        enc.final_norm = nn::LayerNorm<S>::init(dim);
        if (beit) {
            const std::size_t grid = static_cast<std::size_t>(cfg.image_size / cfg.patch_size);
            enc.rel_index = beit_relative_index(grid);
            const std::size_t rows = (2 * grid - 1) * (2 * grid - 1) + 3;
            for (std::size_t i = 0; i < enc.blocks.size(); ++i) {
                enc.rel_bias_tables.push_back(Tensor<S>::randn({rows, enc.num_heads}, rng, 0.02));
            }
        }
        return enc;
    }

    // Relative-position index over (cls + g*g) tokens; the last three table
    // rows serve cls->token, token->cls and cls->cls.
    static IntTensor beit_relative_index(std::size_t grid) {
        const std::size_t t = grid * grid + 1;
        const auto span = static_cast<std::ptrdiff_t>(2 * grid - 1);
        const std::int32_t base = static_cast<std::int32_t>(span * span);
        std::vector<std::int32_t> idx(t * t);
        for (std::size_t a = 0; a < t; ++a) {
            for (std::size_t b = 0; b < t; ++b) {
                std::int32_t v;
                if (a == 0 && b == 0) {
                    v = base + 2;
                } else if (a == 0) {
                    v = base;      // cls attends token
                } else if (b == 0) {
                    v = base + 1;  // token attends cls
                } else {
                    const auto ar = static_cast<std::ptrdiff_t>((a - 1) / grid);
                    const auto ac = static_cast<std::ptrdiff_t>((a - 1) % grid);
                    const auto br = static_cast<std::ptrdiff_t>((b - 1) / grid);
                    const auto bc = static_cast<std::ptrdiff_t>((b - 1) % grid);
                    const auto dr = ar - br + static_cast<std::ptrdiff_t>(grid) - 1;
                    const auto dc = ac - bc + static_cast<std::ptrdiff_t>(grid) - 1;
                    v = static_cast<std::int32_t>(dr * span + dc);
                }
                idx[a * t + b] = v;
            }
        }
        return IntTensor({t * t}, std::move(idx));
    }

    Tensor<S> operator()(const Tensor<S>& images) const {
        Tensor<S> x = patch_embed(images);
        const std::size_t t = x.dim(1);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const auto& blk = blocks[i];
            std::optional<Tensor<S>> bias;
            if (!rel_bias_tables.empty()) {
                Tensor<S> b = embedding_lookup(rel_bias_tables[i], rel_index);        // (T*T, H)
                bias = permute(reshape(b, {t, t, num_heads}), {2, 0, 1});              // (H, T, T)
            }
            x = add(x, nn::full_attention(blk.ln1(x), blk.attn, num_heads, bias));
            x = add(x, blk.mlp(blk.ln2(x)));
        }
        return final_norm(x);
    }

    void collect(const std::string& prefix, nn::ParamList<S>& out) const {
        patch_embed.collect(prefix + ".patch_embed", out);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            blocks[i].collect(prefix + ".blocks." + std::to_string(i), out);
            if (!rel_bias_tables.empty()) {
                out.push_back({prefix + ".blocks." + std::to_string(i) + ".rel_bias", rel_bias_tables[i]});
            }
        }
        final_norm.collect(prefix + ".final_norm", out);
    }
};

template <class S>
struct SwinEncoder {
    struct Block {
        nn::EncoderBlock<S> core;
        Tensor<S> rel_bias_table;
        std::size_t window = 7;
        std::size_t shift = 0;
        std::size_t heads = 2;
    };
    struct Stage {
        std::vector<Block> blocks;
        std::optional<nn::PatchMerging<S>> merge;  // absent on the last stage
    };

    nn::PatchEmbed<S> patch_embed;
    std::vector<Stage> stage_list;
    nn::LayerNorm<S> final_norm;

    static SwinEncoder init(const ModelConfig& cfg, Rng& rng) {
        SwinEncoder enc;
        enc.patch_embed = nn::PatchEmbed<S>::init(static_cast<std::size_t>(cfg.image_size),
                                                  static_cast<std::size_t>(cfg.patch_size),
                                                  static_cast<std::size_t>(cfg.encoder_embed_dim),
                                                  /*class_token=*/false, /*absolute_position=*/false, rng);
        std::size_t grid = static_cast<std::size_t>(cfg.image_size / cfg.patch_size);
        std::size_t dim = static_cast<std::size_t>(cfg.encoder_embed_dim);
        for (int s = 0; s < cfg.stages(); ++s) {
            Stage stage;
            // windows never exceed the grid; shift only makes sense with >1 window
            const std::size_t window = std::min(static_cast<std::size_t>(cfg.window_size), grid);
            const auto heads = static_cast<std::size_t>(cfg.encoder_num_heads.at(static_cast<std::size_t>(s)));
            const auto hidden = static_cast<std::size_t>(cfg.mlp_ratio * static_cast<double>(dim));
            for (int b = 0; b < cfg.encoder_depths.at(static_cast<std::size_t>(s)); ++b) {
                Block blk;
                blk.core = nn::EncoderBlock<S>::init(dim, hidden, rng);
                blk.window = window;
                blk.heads = heads;
                blk.shift = (b % 2 == 1 && window < grid) ? window / 2 : 0;
                blk.rel_bias_table = Tensor<S>::randn({(2 * window - 1) * (2 * window - 1), heads}, rng, 0.02);
                stage.blocks.push_back(std::move(blk));
            }
            if (s + 1 < cfg.stages()) {
                stage.merge = nn::PatchMerging<S>::init(dim, rng);
                dim *= 2;
                grid /= 2;
            }
            enc.stage_list.push_back(std::move(stage));
        }
        enc.final_norm = nn::LayerNorm<S>::init(dim);
        return enc;
    }

    Tensor<S> operator()(const Tensor<S>& images) const {
        Tensor<S> tokens = patch_embed(images);
        const std::size_t b = tokens.dim(0);
        std::size_t grid = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(tokens.dim(1)))));
        std::size_t dim = tokens.dim(2);
        Tensor<S> x = reshape(tokens, {b, grid, grid, dim});
        for (const auto& stage : stage_list) {
            for (const auto& blk : stage.blocks) {
                nn::AttentionConfig acfg;
                acfg.embed_dim = dim;
                acfg.num_heads = blk.heads;
                acfg.window_size = blk.window;
                if (blk.shift > 0) acfg.shift_size = blk.shift;
                Tensor<S> attn_in = blk.core.ln1(x);
                Tensor<S> attn_out = blk.shift > 0
                                         ? nn::shifted_window_attention(attn_in, blk.core.attn, acfg, blk.rel_bias_table)
                                         : nn::window_attention(attn_in, blk.core.attn, acfg, blk.rel_bias_table);
                x = add(x, attn_out);
                x = add(x, blk.core.mlp(blk.core.ln2(x)));
            }
            if (stage.merge) {
                x = (*stage.merge)(x);
                grid /= 2;
                dim *= 2;
            }
        }
        return final_norm(reshape(x, {b, grid * grid, dim}));
    }

    void collect(const std::string& prefix, nn::ParamList<S>& out) const {
        patch_embed.collect(prefix + ".patch_embed", out);
        for (std::size_t s = 0; s < stage_list.size(); ++s) {
            const auto& stage = stage_list[s];
            const std::string sp = prefix + ".stages." + std::to_string(s);
            for (std::size_t bi = 0; bi < stage.blocks.size(); ++bi) {
                stage.blocks[bi].core.collect(sp + ".blocks." + std::to_string(bi), out);
                out.push_back({sp + ".blocks." + std::to_string(bi) + ".rel_bias", stage.blocks[bi].rel_bias_table});
            }
            if (stage.merge) stage.merge->collect(sp + ".merge", out);
        }
        final_norm.collect(prefix + ".final_norm", out);
    }
};

// ---- GPT-2-style decoder ----

template <class S>
struct GptDecoder {
    std::size_t embed_dim = 96;
    std::size_t num_heads = 4;
    std::size_t vocab_size = 512;
    std::size_t max_target_length = 32;
    std::size_t memory_dim = 96;
    Tensor<S> token_embedding;     // (V, D)
    Tensor<S> position_embedding;  // (maxT, D)
    std::vector<nn::DecoderBlock<S>> blocks;
    nn::LayerNorm<S> final_norm;
    nn::Linear<S> head;            // zero-initialized: an untrained model is uniform

    static GptDecoder init(const ModelConfig& cfg, Rng& rng) {
        GptDecoder dec;
        dec.embed_dim = static_cast<std::size_t>(cfg.decoder_embed_dim);
        dec.num_heads = static_cast<std::size_t>(cfg.decoder_num_heads);
        dec.vocab_size = static_cast<std::size_t>(cfg.vocab_size);
        dec.max_target_length = static_cast<std::size_t>(cfg.max_target_length);
        dec.memory_dim = static_cast<std::size_t>(cfg.memory_dim());
        dec.token_embedding = Tensor<S>::randn({dec.vocab_size, dec.embed_dim}, rng, 0.02);
        dec.position_embedding = Tensor<S>::randn({dec.max_target_length, dec.embed_dim}, rng, 0.02);
        const auto hidden = static_cast<std::size_t>(cfg.mlp_ratio * cfg.decoder_embed_dim);
        for (int i = 0; i < cfg.decoder_depth; ++i) {
            dec.blocks.push_back(nn::DecoderBlock<S>::init(dec.embed_dim, dec.memory_dim, hidden, rng));
        }
        dec.final_norm = nn::LayerNorm<S>::init(dec.embed_dim);
        dec.head = nn::Linear<S>::zero_init(dec.embed_dim, dec.vocab_size);
        return dec;
    }

    // ids (B, T), memory (B, Tm, Dm) -> logits (B, T, V)
    Tensor<S> operator()(const IntTensor& ids, const Tensor<S>& memory) const {
        if (ids.shape.size() != 2) throw ShapeError("decoder ids must be (B, T), got " + format_shape(ids.shape));
        const std::size_t t = ids.shape[1];
        if (t == 0 || t > max_target_length) {
            throw ShapeError("decoder sequence length " + std::to_string(t) + " outside [1, " +
                             std::to_string(max_target_length) + "]");
        }
        Tensor<S> x = embedding_lookup(token_embedding, ids);
        x = add(x, slice(position_embedding, 0, 0, t));
        for (const auto& blk : blocks) x = blk(x, memory, num_heads);
        return head(final_norm(x));
    }

    // All-zero single-token memory; used when the decoder trains as a plain LM.
    Tensor<S> zero_memory(std::size_t batch) const { return Tensor<S>::zeros({batch, 1, memory_dim}); }

    void collect(const std::string& prefix, nn::ParamList<S>& out) const {
        out.push_back({prefix + ".token_embedding", token_embedding});
        out.push_back({prefix + ".position_embedding", position_embedding});
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            blocks[i].collect(prefix + ".blocks." + std::to_string(i), out);
        }
        final_norm.collect(prefix + ".final_norm", out);
        head.collect(prefix + ".head", out);
    }
};

// ---- assembled recognizer ----

template <class S>
struct Recognizer {
    ModelConfig config;
    ImageProcessorConfig processor;
    std::variant<VitEncoder<S>, SwinEncoder<S>> encoder;
    GptDecoder<S> decoder;

    static Recognizer init(const ModelConfig& cfg, const ImageProcessorConfig& proc, std::uint64_t seed) {
        cfg.validate();
        proc.validate();
        if (proc.target_size != cfg.image_size) {
            throw ConfigError("image processor target size " + std::to_string(proc.target_size) +
                              " must match model image size " + std::to_string(cfg.image_size));
        }
        Rng rng(detail::mix64(seed ^ 0x5eed0001ULL));
        Recognizer model{cfg, proc,
                         cfg.encoder_kind == "swin"
                             ? std::variant<VitEncoder<S>, SwinEncoder<S>>(SwinEncoder<S>::init(cfg, rng))
                             : std::variant<VitEncoder<S>, SwinEncoder<S>>(VitEncoder<S>::init(cfg, rng)),
                         GptDecoder<S>::init(cfg, rng)};
        return model;
    }

    // batch (B, 3, H, W) -> memory (B, Tm, Dm)
    Tensor<S> encode_images(const Tensor<S>& batch) const {
        return std::visit([&](const auto& enc) { return enc(batch); }, encoder);
    }

    Tensor<S> decode_logits(const Tensor<S>& memory, const IntTensor& ids) const { return decoder(ids, memory); }

    // Next-token logits for one prefix against one image's memory.
    std::vector<double> decode_step(const Tensor<S>& memory, const std::vector<int>& prefix_ids) const {
        if (prefix_ids.empty() || prefix_ids.front() != 1) {
            throw ValidationError("decoder prefix must begin with BOS");
        }
        if (prefix_ids.size() >= decoder.max_target_length) {
            throw ValidationError("decoder prefix length " + std::to_string(prefix_ids.size()) +
                                  " exceeds max target length " + std::to_string(decoder.max_target_length));
        }
        std::vector<std::int32_t> ids(prefix_ids.begin(), prefix_ids.end());
        const std::size_t t = ids.size();
        Tensor<S> logits = decoder(IntTensor({1, t}, std::move(ids)), memory);
        std::vector<double> row(decoder.vocab_size);
        const auto& lv = logits.value();
        for (std::size_t i = 0; i < row.size(); ++i) {
            row[i] = static_cast<double>(lv[(t - 1) * decoder.vocab_size + i]);
        }
        return row;
    }

    nn::ParamList<S> parameters() const {
        nn::ParamList<S> out;
        std::visit([&](const auto& enc) { enc.collect("encoder", out); }, encoder);
        decoder.collect("decoder", out);
        return out;
    }
};

// ---- checkpoints ----

template <class S>
struct TrainState {
    std::int64_t step = 0;
    std::int64_t epoch = 0;
    std::vector<std::vector<S>> first_moments;   // aligned with parameters() order
    std::vector<std::vector<S>> second_moments;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint_blob(const std::filesystem::path& path, const std::string& config_json,
                           std::uint64_t tokenizer_hash, const std::vector<std::pair<std::string, const void*>>& names,
                           const std::vector<std::pair<std::size_t, int>>& sizes, const std::string& train_state_json,
                           const std::vector<std::pair<const void*, std::size_t>>& extra_blobs);

struct CheckpointRaw {
    std::string config_json;
    std::uint64_t tokenizer_hash = 0;
    std::vector<std::pair<std::string, std::vector<double>>> params;  // values widened to double
    std::vector<int> param_dtypes;                                    // bytes per scalar (4 or 8)
    std::string train_state_json;
    std::vector<std::vector<double>> extra;  // optimizer moments, widened
};

CheckpointRaw read_checkpoint_raw(const std::filesystem::path& path);

template <class S>
void save_checkpoint(const Recognizer<S>& model, const std::filesystem::path& path, std::uint64_t tokenizer_hash,
                     const TrainState<S>* train_state = nullptr) {
    const auto params = model.parameters();
    std::vector<std::pair<std::string, const void*>> names;
    std::vector<std::pair<std::size_t, int>> sizes;
    names.reserve(params.size());
    for (const auto& p : params) {
        names.emplace_back(p.name, static_cast<const void*>(p.tensor.value().data()));
        sizes.emplace_back(p.tensor.size(), static_cast<int>(sizeof(S)));
    }
    std::string state_json;
    std::vector<std::pair<const void*, std::size_t>> blobs;
    if (train_state) {
        nlohmann::ordered_json j;
        j["step"] = train_state->step;
        j["epoch"] = train_state->epoch;
        state_json = j.dump();
        for (const auto& m : train_state->first_moments) blobs.emplace_back(m.data(), m.size() * sizeof(S));
        for (const auto& v : train_state->second_moments) blobs.emplace_back(v.data(), v.size() * sizeof(S));
    }
    write_checkpoint_blob(path, model.config.canonical_json(), tokenizer_hash, names, sizes, state_json, blobs);
}

// Builds the model recorded in the file. Optional expectations let callers
// refuse checkpoints from another configuration or tokenizer.
template <class S>
Recognizer<S> load_checkpoint(const std::filesystem::path& path, const ImageProcessorConfig& proc,
                              const std::optional<ModelConfig>& expected_config = std::nullopt,
                              const std::optional<std::uint64_t>& expected_tokenizer_hash = std::nullopt,
                              TrainState<S>* train_state_out = nullptr) {
    const CheckpointRaw raw = read_checkpoint_raw(path);
    const ModelConfig stored = ModelConfig::from_json(nlohmann::json::parse(raw.config_json));
    if (expected_config && expected_config->canonical_json() != stored.canonical_json()) {
        throw FormatError("checkpoint configuration does not match the requested model: stored " +
                          stored.canonical_json());
    }
    if (expected_tokenizer_hash && *expected_tokenizer_hash != raw.tokenizer_hash) {
        throw FormatError("checkpoint tokenizer hash mismatch: refusing to load");
    }
    for (int dtype : raw.param_dtypes) {
        if (dtype != static_cast<int>(sizeof(S))) {
            throw FormatError("checkpoint scalar width " + std::to_string(dtype * 8) + " bits does not match model");
        }
    }

    Recognizer<S> model = Recognizer<S>::init(stored, proc, /*seed=*/0);
    auto params = model.parameters();
    if (params.size() != raw.params.size()) {
        throw FormatError("checkpoint holds " + std::to_string(raw.params.size()) + " tensors, model needs " +
                          std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].name != raw.params[i].first) {
            throw FormatError("checkpoint tensor '" + raw.params[i].first + "' does not match model tensor '" +
                              params[i].name + "'");
        }
        auto& dst = params[i].tensor.value_mut();
        const auto& src = raw.params[i].second;
        if (dst.size() != src.size()) {
            throw FormatError("checkpoint tensor '" + params[i].name + "' has " + std::to_string(src.size()) +
                              " values, model expects " + std::to_string(dst.size()));
        }
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] = static_cast<S>(src[k]);
    }
    if (train_state_out && !raw.train_state_json.empty()) {
        const auto j = nlohmann::json::parse(raw.train_state_json);
        train_state_out->step = j.at("step").get<std::int64_t>();
        train_state_out->epoch = j.at("epoch").get<std::int64_t>();
        const std::size_t n = raw.extra.size() / 2;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<S> m(raw.extra[i].size());
            for (std::size_t k = 0; k < m.size(); ++k) m[k] = static_cast<S>(raw.extra[i][k]);
            train_state_out->first_moments.push_back(std::move(m));
        }
        for (std::size_t i = n; i < raw.extra.size(); ++i) {
            std::vector<S> v(raw.extra[i].size());
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<S>(raw.extra[i][k]);
            train_state_out->second_moments.push_back(std::move(v));
        }
    }
    return model;
}

std::uint64_t read_checkpoint_tokenizer_hash(const std::filesystem::path& path);
ModelConfig read_checkpoint_config(const std::filesystem::path& path);

}  // namespace lemmarec::models
