#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace lemmarec::bpe {

// Fixed special-token ids; byte symbols follow, merged tokens after that.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kByteBase = 3;                 // byte b maps to id kByteBase + b
inline constexpr int kMinVocabSize = kByteBase + 256;  // specials + all bytes

struct Merge {
    int left = 0;
    int right = 0;
};

// Byte-level BPE vocabulary. Every byte is a base symbol, so any string
// encodes without out-of-vocabulary failures; decode(encode(x)) == x.
class Vocab {
public:
    Vocab();  // bytes + specials only, no merges

    int size() const { return static_cast<int>(token_bytes_.size()); }
    const std::vector<Merge>& merges() const { return merges_; }

    // Byte string backing a token id; specials map to the empty string.
    const std::string& token_bytes(int id) const;

    std::vector<int> encode(const std::string& text) const;
    std::string decode(const std::vector<int>& ids) const;  // skips specials

    void add_merge(int left, int right);

    std::string serialize() const;
    static Vocab deserialize(const std::string& text);

    void save(const std::filesystem::path& path) const;
    static Vocab load(const std::filesystem::path& path);

    // FNV-1a over the serialized form; checkpoints store this to detect
    // tokenizer/model mismatches.
    std::uint64_t hash() const;

private:
    std::vector<std::string> token_bytes_;
    std::vector<Merge> merges_;
};

// Greedy highest-frequency pair merging until the vocabulary reaches
// target_vocab_size or no adjacent pair occurs twice. Frequency ties break on
// the lexicographically smallest (left bytes, right bytes) pair, which makes
// training fully deterministic.
Vocab train_bpe(const std::vector<std::string>& corpus, int target_vocab_size);

}  // namespace lemmarec::bpe
