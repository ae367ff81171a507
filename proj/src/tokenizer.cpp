#include "lemmarec/tokenizer.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "lemmarec/errors.hpp"
#include "lemmarec/rng.hpp"

namespace lemmarec::bpe {

Vocab::Vocab() {
    token_bytes_.resize(kMinVocabSize);
    for (int b = 0; b < 256; ++b) token_bytes_[kByteBase + b] = std::string(1, static_cast<char>(b));
}

const std::string& Vocab::token_bytes(int id) const {
    if (id < 0 || id >= size()) throw FormatError("token id out of range: " + std::to_string(id));
    return token_bytes_[id];
}

void Vocab::add_merge(int left, int right) {
    if (left < kByteBase || left >= size() || right < kByteBase || right >= size()) {
        throw FormatError("merge references undefined tokens: " + std::to_string(left) + " " + std::to_string(right));
    }
    merges_.push_back({left, right});
    token_bytes_.push_back(token_bytes_[left] + token_bytes_[right]);
}

std::vector<int> Vocab::encode(const std::string& text) const {
    std::vector<int> ids;
    ids.reserve(text.size());
    for (unsigned char c : text) ids.push_back(kByteBase + c);
    // Apply merges in training order; each pass fuses left-to-right.
    for (std::size_t m = 0; m < merges_.size(); ++m) {
        const int left = merges_[m].left;
        const int right = merges_[m].right;
        const int fused = kMinVocabSize + static_cast<int>(m);
        std::size_t write = 0;
        std::size_t read = 0;
        while (read < ids.size()) {
            if (read + 1 < ids.size() && ids[read] == left && ids[read + 1] == right) {
                ids[write++] = fused;
                read += 2;
            } else {
                ids[write++] = ids[read++];
            }
        }
        ids.resize(write);
    }
    return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
        if (id < 0 || id >= size()) throw FormatError("cannot decode unknown token id " + std::to_string(id));
        out += token_bytes_[id];
    }
    return out;
}

std::string Vocab::serialize() const {
    std::ostringstream out;
    out << "lemmarec-bpe v1\n";
    out << "specials pad=" << kPadId << " bos=" << kBosId << " eos=" << kEosId << "\n";
    out << "merges " << merges_.size() << "\n";
    for (const auto& m : merges_) out << m.left << " " << m.right << "\n";
    return out.str();
}

Vocab Vocab::deserialize(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "lemmarec-bpe v1") throw FormatError("bad tokenizer header");
    if (!std::getline(in, line) || line.rfind("specials ", 0) != 0) throw FormatError("bad tokenizer specials line");
    std::size_t count = 0;
    {
        std::string word;
        if (!(in >> word >> count) || word != "merges") throw FormatError("bad tokenizer merges header");
    }
    Vocab vocab;
    for (std::size_t i = 0; i < count; ++i) {
        int left = -1;
        int right = -1;
        if (!(in >> left >> right)) throw FormatError("truncated tokenizer merge list");
        vocab.add_merge(left, right);
    }
    return vocab;
}

void Vocab::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write tokenizer file: " + path.string());
    out << serialize();
}

Vocab Vocab::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tokenizer file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

std::uint64_t Vocab::hash() const { return detail::fnv1a(serialize()); }

Vocab train_bpe(const std::vector<std::string>& corpus, int target_vocab_size) {
    if (corpus.empty()) throw ConfigError("BPE training corpus is empty");
    if (target_vocab_size <= kMinVocabSize) {
        throw ConfigError("target vocab size must exceed " + std::to_string(kMinVocabSize) +
                          " (specials + byte symbols), got " + std::to_string(target_vocab_size));
    }

    Vocab vocab;
    std::vector<std::vector<int>> sequences;
    sequences.reserve(corpus.size());
    for (const auto& s : corpus) {
        std::vector<int> ids;
        ids.reserve(s.size());
        for (unsigned char c : s) ids.push_back(kByteBase + c);
        sequences.push_back(std::move(ids));
    }

    while (vocab.size() < target_vocab_size) {
        // Count adjacent pairs; overlapping occurrences each count once.
        std::map<std::pair<int, int>, std::int64_t> counts;
        for (const auto& seq : sequences) {
            for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[{seq[i], seq[i + 1]}];
        }

        std::pair<int, int> best{-1, -1};
        std::int64_t best_count = 0;
        for (const auto& [pair, count] : counts) {
            if (count > best_count) {
                best = pair;
                best_count = count;
            } else if (count == best_count && best_count > 0) {
                const auto key = std::make_pair(vocab.token_bytes(pair.first), vocab.token_bytes(pair.second));
                const auto best_key = std::make_pair(vocab.token_bytes(best.first), vocab.token_bytes(best.second));
                if (key < best_key) best = pair;
            }
        }
        if (best_count < 2) break;  // no pair repeats

        const int fused = vocab.size();
        vocab.add_merge(best.first, best.second);
        for (auto& seq : sequences) {
            std::size_t write = 0;
            std::size_t read = 0;
            while (read < seq.size()) {
                if (read + 1 < seq.size() && seq[read] == best.first && seq[read + 1] == best.second) {
                    seq[write++] = fused;
                    read += 2;
                } else {
                    seq[write++] = seq[read++];
                }
            }
            seq.resize(write);
        }
    }
    return vocab;
}

}  // namespace lemmarec::bpe
