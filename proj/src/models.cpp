#include "lemmarec/models.hpp"

#include <cstring>
#include <fstream>

namespace lemmarec::models {

void ModelConfig::validate() const {
    if (encoder_kind != "vit" && encoder_kind != "beit" && encoder_kind != "swin") {
        throw ConfigError("unknown encoder kind: " + encoder_kind);
    }
    if (image_size <= 0 || patch_size <= 0 || image_size % patch_size != 0) {
        throw ConfigError("image size " + std::to_string(image_size) + " must be a positive multiple of patch size " +
                          std::to_string(patch_size));
    }
    if (encoder_depths.empty() || encoder_depths.size() != encoder_num_heads.size()) {
        throw ConfigError("encoder depths and head counts must align, got " + std::to_string(encoder_depths.size()) +
                          " and " + std::to_string(encoder_num_heads.size()));
    }
    if (encoder_kind != "swin" && encoder_depths.size() != 1) {
        throw ConfigError(encoder_kind + " encoder takes a single stage");
    }
    int dim = encoder_embed_dim;
    int grid = image_size / patch_size;
    for (std::size_t s = 0; s < encoder_depths.size(); ++s) {
        if (encoder_depths[s] < 1) throw ConfigError("encoder stage depth must be >= 1");
        const int heads = encoder_num_heads[s];
        if (heads < 1 || dim % heads != 0) {
            throw ConfigError("stage " + std::to_string(s) + " dim " + std::to_string(dim) +
                              " not divisible by heads " + std::to_string(heads));
        }
        if (encoder_kind == "swin") {
            const int window = std::min(window_size, grid);
            if (window < 1 || grid % window != 0) {
                throw ConfigError("stage " + std::to_string(s) + " grid " + std::to_string(grid) +
                                  " not divisible by window " + std::to_string(window));
            }
            if (s + 1 < encoder_depths.size()) {
                if (grid % 2 != 0) throw ConfigError("patch merging needs an even grid, got " + std::to_string(grid));
                grid /= 2;
                dim *= 2;
            }
        }
    }
    if (decoder_embed_dim < 1 || decoder_depth < 1 || decoder_num_heads < 1 ||
        decoder_embed_dim % decoder_num_heads != 0) {
        throw ConfigError("decoder dim " + std::to_string(decoder_embed_dim) + " not divisible by heads " +
                          std::to_string(decoder_num_heads));
    }
    if (vocab_size < 4) throw ConfigError("vocab size too small");
    if (max_target_length < 2) throw ConfigError("max target length must be >= 2");
    if (!(mlp_ratio > 0.0)) throw ConfigError("mlp ratio must be positive");
}

nlohmann::ordered_json ModelConfig::to_json() const {
    nlohmann::ordered_json j;
    j["encoder_kind"] = encoder_kind;
    j["image_size"] = image_size;
    j["patch_size"] = patch_size;
    j["encoder_embed_dim"] = encoder_embed_dim;
    j["encoder_depths"] = encoder_depths;
    j["encoder_num_heads"] = encoder_num_heads;
    j["window_size"] = window_size;
    j["decoder_embed_dim"] = decoder_embed_dim;
    j["decoder_depth"] = decoder_depth;
    j["decoder_num_heads"] = decoder_num_heads;
    j["vocab_size"] = vocab_size;
    j["max_target_length"] = max_target_length;
    j["mlp_ratio"] = mlp_ratio;
    return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.encoder_kind = j.value("encoder_kind", cfg.encoder_kind);
    cfg = defaults_for(cfg.encoder_kind);
    cfg.image_size = j.value("image_size", cfg.image_size);
    cfg.patch_size = j.value("patch_size", cfg.patch_size);
    cfg.encoder_embed_dim = j.value("encoder_embed_dim", cfg.encoder_embed_dim);
    if (j.contains("encoder_depths")) cfg.encoder_depths = j.at("encoder_depths").get<std::vector<int>>();
    if (j.contains("encoder_num_heads")) cfg.encoder_num_heads = j.at("encoder_num_heads").get<std::vector<int>>();
    cfg.window_size = j.value("window_size", cfg.window_size);
    cfg.decoder_embed_dim = j.value("decoder_embed_dim", cfg.decoder_embed_dim);
    cfg.decoder_depth = j.value("decoder_depth", cfg.decoder_depth);
    cfg.decoder_num_heads = j.value("decoder_num_heads", cfg.decoder_num_heads);
    cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
    cfg.max_target_length = j.value("max_target_length", cfg.max_target_length);
    cfg.mlp_ratio = j.value("mlp_ratio", cfg.mlp_ratio);
    cfg.validate();
    return cfg;
}

nlohmann::ordered_json ImageProcessorConfig::to_json() const {
    nlohmann::ordered_json j;
    j["target_size"] = target_size;
    j["mean"] = mean;
    j["std"] = std;
    j["resize_filter"] = resize_filter;
    return j;
}

ImageProcessorConfig ImageProcessorConfig::from_json(const nlohmann::json& j) {
    ImageProcessorConfig cfg;
    cfg.target_size = j.value("target_size", cfg.target_size);
    if (j.contains("mean")) cfg.mean = j.at("mean").get<std::array<double, 3>>();
    if (j.contains("std")) cfg.std = j.at("std").get<std::array<double, 3>>();
    cfg.resize_filter = j.value("resize_filter", cfg.resize_filter);
    cfg.validate();
    return cfg;
}

namespace {

constexpr char kMagic[4] = {'L', 'M', 'R', 'C'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("truncated checkpoint file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw FormatError("truncated checkpoint file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::string get_string(std::istream& in) {
    const std::uint32_t len = get_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in) throw FormatError("truncated checkpoint string");
    return s;
}

void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

// Scalars stored little-endian; on little-endian hosts that is a raw copy.
void put_scalars(std::ostream& out, const void* data, std::size_t count, int width) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(count * static_cast<std::size_t>(width)));
}

}  // namespace

void write_checkpoint_blob(const std::filesystem::path& path, const std::string& config_json,
                           std::uint64_t tokenizer_hash, const std::vector<std::pair<std::string, const void*>>& names,
                           const std::vector<std::pair<std::size_t, int>>& sizes, const std::string& train_state_json,
                           const std::vector<std::pair<const void*, std::size_t>>& extra_blobs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint: " + path.string());
    out.write(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_string(out, config_json);
    put_u64(out, tokenizer_hash);
    put_u32(out, static_cast<std::uint32_t>(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
        put_string(out, names[i].first);
        put_u32(out, static_cast<std::uint32_t>(sizes[i].second));       // scalar width in bytes
        put_u64(out, static_cast<std::uint64_t>(sizes[i].first));        // element count
        put_scalars(out, names[i].second, sizes[i].first, sizes[i].second);
    }
    put_string(out, train_state_json);
    put_u32(out, static_cast<std::uint32_t>(extra_blobs.size()));
    for (const auto& [data, bytes] : extra_blobs) {
        put_u64(out, static_cast<std::uint64_t>(bytes));
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    }
    if (!out) throw IoError("failed writing checkpoint payload: " + path.string());
}

CheckpointRaw read_checkpoint_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a checkpoint file: " + path.string());
    const std::uint32_t version = get_u32(in);
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    CheckpointRaw raw;
    raw.config_json = get_string(in);
    raw.tokenizer_hash = get_u64(in);
    const std::uint32_t count = get_u32(in);
    raw.params.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = get_string(in);
        const auto width = static_cast<int>(get_u32(in));
        if (width != 4 && width != 8) throw FormatError("bad scalar width in checkpoint: " + std::to_string(width));
        const auto n = static_cast<std::size_t>(get_u64(in));
        std::vector<double> values(n);
        if (width == 4) {
            std::vector<float> buf(n);
            in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 4));
            for (std::size_t k = 0; k < n; ++k) values[k] = buf[k];
        } else {
            in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * 8));
        }
        if (!in) throw FormatError("truncated checkpoint tensor '" + name + "'");
        raw.params.emplace_back(name, std::move(values));
        raw.param_dtypes.push_back(width);
    }
    raw.train_state_json = get_string(in);
    const std::uint32_t blobs = get_u32(in);
    const int width = raw.param_dtypes.empty() ? 4 : raw.param_dtypes.front();
    for (std::uint32_t i = 0; i < blobs; ++i) {
        const auto bytes = static_cast<std::size_t>(get_u64(in));
        const std::size_t n = bytes / static_cast<std::size_t>(width);
        std::vector<double> values(n);
        if (width == 4) {
            std::vector<float> buf(n);
            in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
            for (std::size_t k = 0; k < n; ++k) values[k] = buf[k];
        } else {
            in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
        }
        if (!in) throw FormatError("truncated checkpoint optimizer state");
        raw.extra.push_back(std::move(values));
    }
    return raw;
}

std::uint64_t read_checkpoint_tokenizer_hash(const std::filesystem::path& path) {
    return read_checkpoint_raw(path).tokenizer_hash;
}

ModelConfig read_checkpoint_config(const std::filesystem::path& path) {
    return ModelConfig::from_json(nlohmann::json::parse(read_checkpoint_raw(path).config_json));
}

}  // namespace lemmarec::models
