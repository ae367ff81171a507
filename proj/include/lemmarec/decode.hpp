#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lemmarec/models.hpp"
#include "lemmarec/tokenizer.hpp"

namespace lemmarec::decode {

struct GenerationConfig {
    int num_beams = 4;
    int max_length = 32;  // total ids including BOS (and EOS when emitted)
    int no_repeat_ngram_size = 3;  // 0 disables
    double length_penalty = 2.0;
    bool early_stopping = true;

    void validate() const;
    nlohmann::ordered_json to_json() const;
    static GenerationConfig from_json(const nlohmann::json& j);
};

struct BeamHypothesis {
    std::vector<int> ids;  // BOS-prefixed
    double log_prob = 0.0;
    bool finished = false;
};

// Next-token logits provider; lets toy models drive the search in tests.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::vector<double> next_logits(const std::vector<int>& prefix_ids) = 0;
    virtual std::vector<std::vector<double>> next_logits_batch(const std::vector<std::vector<int>>& prefixes) {
        std::vector<std::vector<double>> out;
        out.reserve(prefixes.size());
        for (const auto& p : prefixes) out.push_back(next_logits(p));
        return out;
    }
};

// Tokens t such that (last n-1 tokens of hypothesis, t) already occurs as an
// n-gram in the hypothesis. Sorted, unique.
std::vector<int> ban_repeated_ngrams(const std::vector<int>& hypothesis, int n);

struct BeamResult {
    std::vector<int> ids;   // BOS ... (EOS when finished by EOS)
    double score = 0.0;     // log_prob / generated_length^length_penalty
    double log_prob = 0.0;  // cumulative
};

// Deterministic beam search; ties break on lower token id. EOS is never
// banned, so a step always has a candidate.
BeamResult beam_search_ids(Scorer& scorer, const GenerationConfig& cfg, int bos_id = bpe::kBosId,
                           int eos_id = bpe::kEosId);

BeamResult greedy_ids(Scorer& scorer, int max_length, int bos_id = bpe::kBosId, int eos_id = bpe::kEosId);

// Runs the search and decodes the winner with specials stripped.
std::string beam_search(Scorer& scorer, const bpe::Vocab& vocab, const GenerationConfig& cfg);

// Scorer over a recognizer and one image's encoder memory.
// TODO: cache per-step keys/values instead of re-running the decoder over the
// whole prefix on every expansion.
template <class S>
class RecognizerScorer : public Scorer {
public:
    RecognizerScorer(const models::Recognizer<S>& model, Tensor<S> memory)
        : model_(model), memory_(std::move(memory)) {
        if (memory_.rank() != 3 || memory_.dim(0) != 1) {
            throw ShapeError("RecognizerScorer expects memory (1, Tm, Dm), got " + format_shape(memory_.shape()));
        }
    }

    std::vector<double> next_logits(const std::vector<int>& prefix_ids) override {
        NoGradGuard no_grad;
        return model_.decode_step(memory_, prefix_ids);
    }

    std::vector<std::vector<double>> next_logits_batch(const std::vector<std::vector<int>>& prefixes) override {
        NoGradGuard no_grad;
        if (prefixes.empty()) return {};
        const std::size_t n = prefixes.size();
        const std::size_t t = prefixes.front().size();
        std::vector<std::int32_t> ids(n * t);
        for (std::size_t i = 0; i < n; ++i) {
            if (prefixes[i].size() != t) throw ShapeError("batched prefixes must share a length");
            for (std::size_t j = 0; j < t; ++j) ids[i * t + j] = prefixes[i][j];
        }
        // tile the single-image memory across beams
        const std::size_t tm = memory_.dim(1);
        const std::size_t dm = memory_.dim(2);
        std::vector<S> mem(n * tm * dm);
        for (std::size_t i = 0; i < n; ++i) {
            std::copy(memory_.value().begin(), memory_.value().end(),
                      mem.begin() + static_cast<std::ptrdiff_t>(i * tm * dm));
        }
        const Tensor<S> memory = Tensor<S>::from({n, tm, dm}, std::move(mem));
        const Tensor<S> logits = model_.decode_logits(memory, IntTensor({n, t}, std::move(ids)));
        const std::size_t v = logits.shape().back();
        std::vector<std::vector<double>> out(n, std::vector<double>(v));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < v; ++k) {
                out[i][k] = static_cast<double>(logits.value()[(i * t + (t - 1)) * v + k]);
            }
        }
        return out;
    }

private:
    const models::Recognizer<S>& model_;
    Tensor<S> memory_;
};

}  // namespace lemmarec::decode
