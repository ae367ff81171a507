#include "lemmarec/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lemmarec/errors.hpp"

namespace lemmarec::decode {

void GenerationConfig::validate() const {
    if (num_beams < 1) throw ConfigError("num_beams must be >= 1");
    if (max_length < 2) throw ConfigError("max_length must be >= 2");
    if (no_repeat_ngram_size < 0) throw ConfigError("no_repeat_ngram_size must be >= 0");
}

nlohmann::ordered_json GenerationConfig::to_json() const {
    nlohmann::ordered_json j;
    j["num_beams"] = num_beams;
    j["max_length"] = max_length;
    j["no_repeat_ngram_size"] = no_repeat_ngram_size;
    j["length_penalty"] = length_penalty;
    j["early_stopping"] = early_stopping;
    return j;
}

GenerationConfig GenerationConfig::from_json(const nlohmann::json& j) {
    GenerationConfig cfg;
    cfg.num_beams = j.value("num_beams", cfg.num_beams);
    cfg.max_length = j.value("max_length", cfg.max_length);
    cfg.no_repeat_ngram_size = j.value("no_repeat_ngram_size", cfg.no_repeat_ngram_size);
    cfg.length_penalty = j.value("length_penalty", cfg.length_penalty);
    cfg.early_stopping = j.value("early_stopping", cfg.early_stopping);
    cfg.validate();
    return cfg;
}

std::vector<int> ban_repeated_ngrams(const std::vector<int>& hypothesis, int n) {
    if (n < 1) throw ConfigError("n-gram size must be >= 1 to ban repeats");
    const auto len = hypothesis.size();
    const auto ctx = static_cast<std::size_t>(n - 1);
    if (len < ctx) return {};
    std::set<int> banned;
    for (std::size_t i = 0; i + ctx < len; ++i) {
        bool match = true;
        for (std::size_t k = 0; k < ctx; ++k) {
            if (hypothesis[i + k] != hypothesis[len - ctx + k]) {
                match = false;
                break;
            }
        }
        if (match) banned.insert(hypothesis[i + ctx]);
    }
    return {banned.begin(), banned.end()};
}

namespace {

std::vector<double> log_softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw NumericError("empty logits row");
    double max = logits[0];
    for (double v : logits) {
        if (std::isnan(v)) throw NumericError("model emitted NaN logits");
        max = std::max(max, v);
    }
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - max);
    const double lse = max + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

double penalized_score(double log_prob, std::size_t ids_size, double length_penalty) {
    // generated length excludes BOS and counts EOS when present
    const auto gen_len = static_cast<double>(ids_size - 1);
    return log_prob / std::pow(gen_len, length_penalty);
}

struct Alive {
    std::vector<int> ids;
    double log_prob = 0.0;
};

}  // namespace

namespace {

// Most optimistic penalized score an alive beam could still reach: sums only
// decrease, so assume no further loss and (for positive penalties, which favor
// longer sequences) the maximum generated length.
double best_attainable(double log_prob, std::size_t current_ids, int max_length, double length_penalty) {
    const double now = static_cast<double>(current_ids - 1);
    const double cap = static_cast<double>(max_length - 1);
    const double len = length_penalty > 0.0 ? cap : now;
    return log_prob / std::pow(std::max(len, 1.0), length_penalty);
}

}  // namespace

BeamResult beam_search_ids(Scorer& scorer, const GenerationConfig& cfg, int bos_id, int eos_id) {
    cfg.validate();
    std::vector<Alive> alive{{{bos_id}, 0.0}};
    std::vector<BeamHypothesis> finished;

    while (!alive.empty()) {
        // Early stopping: halt once num_beams finished hypotheses exist and no
        // alive beam can attain a better penalized score than the num_beams-th
        // best finished one. The count alone is not a sound stop: short junk
        // hypotheses finish first and would shadow a stronger beam still in
        // flight.
        if (cfg.early_stopping && finished.size() >= static_cast<std::size_t>(cfg.num_beams)) {
            std::vector<double> scores;
            scores.reserve(finished.size());
            for (const auto& h : finished) {
                scores.push_back(penalized_score(h.log_prob, h.ids.size(), cfg.length_penalty));
            }
            std::nth_element(scores.begin(), scores.begin() + (cfg.num_beams - 1), scores.end(),
                             std::greater<double>());
            const double kept_worst = scores[static_cast<std::size_t>(cfg.num_beams - 1)];
            double alive_bound = -std::numeric_limits<double>::infinity();
            for (const auto& a : alive) {
                alive_bound = std::max(alive_bound,
                                       best_attainable(a.log_prob, a.ids.size(), cfg.max_length, cfg.length_penalty));
            }
            if (alive_bound <= kept_worst) break;
        }
        if (alive.front().ids.size() >= static_cast<std::size_t>(cfg.max_length)) {
            for (auto& a : alive) finished.push_back({std::move(a.ids), a.log_prob, true});
            break;
        }

        std::vector<std::vector<int>> prefixes;
        prefixes.reserve(alive.size());
        for (const auto& a : alive) prefixes.push_back(a.ids);
        const auto logits_rows = scorer.next_logits_batch(prefixes);

        struct Cand {
            double log_prob;
            int token;
            std::size_t beam;
        };
        std::vector<Cand> cands;
        cands.reserve(alive.size() * logits_rows.front().size());
        for (std::size_t b = 0; b < alive.size(); ++b) {
            const auto logp = log_softmax(logits_rows[b]);
            std::vector<int> banned;
            if (cfg.no_repeat_ngram_size > 0) banned = ban_repeated_ngrams(alive[b].ids, cfg.no_repeat_ngram_size);
            std::size_t ban_pos = 0;
            for (int t = 0; t < static_cast<int>(logp.size()); ++t) {
                while (ban_pos < banned.size() && banned[ban_pos] < t) ++ban_pos;
                const bool is_banned = ban_pos < banned.size() && banned[ban_pos] == t;
                if (is_banned && t != eos_id) continue;  // EOS stays reachable
                cands.push_back({alive[b].log_prob + logp[static_cast<std::size_t>(t)], t, b});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
            if (a.token != b.token) return a.token < b.token;
            return a.beam < b.beam;
        });

        // Scan candidates best-first until the alive slots are filled; EOS
        // candidates ranked above that cutoff finish. Below the cutoff they
        // are dominated by an already-kept candidate of the same length, and
        // with num_beams = 1 this degenerates to greedy argmax decoding.
        std::vector<Alive> next;
        next.reserve(static_cast<std::size_t>(cfg.num_beams));
        for (const auto& c : cands) {
            if (next.size() >= static_cast<std::size_t>(cfg.num_beams)) break;
            std::vector<int> ids = alive[c.beam].ids;
            ids.push_back(c.token);
            if (c.token == eos_id) {
                finished.push_back({std::move(ids), c.log_prob, true});
            } else {
                next.push_back({std::move(ids), c.log_prob});
            }
        }
        alive = std::move(next);
    }

    if (finished.empty()) throw NumericError("beam search produced no finished hypothesis");
    const BeamHypothesis* best = nullptr;
    double best_score = 0.0;
    for (const auto& h : finished) {
        const double score = penalized_score(h.log_prob, h.ids.size(), cfg.length_penalty);
        if (!best || score > best_score || (score == best_score && h.ids < best->ids)) {
            best = &h;
            best_score = score;
        }
    }
    return {best->ids, best_score, best->log_prob};
}

BeamResult greedy_ids(Scorer& scorer, int max_length, int bos_id, int eos_id) {
    if (max_length < 2) throw ConfigError("max_length must be >= 2");
    std::vector<int> ids{bos_id};
    double log_prob = 0.0;
    while (ids.size() < static_cast<std::size_t>(max_length)) {
        const auto logp = log_softmax(scorer.next_logits(ids));
        std::size_t arg = 0;
        for (std::size_t t = 1; t < logp.size(); ++t) {
            if (logp[t] > logp[arg]) arg = t;  // ties keep the lower id
        }
        ids.push_back(static_cast<int>(arg));
        log_prob += logp[arg];
        if (static_cast<int>(arg) == eos_id) break;
    }
    return {ids, log_prob, log_prob};
}

std::string beam_search(Scorer& scorer, const bpe::Vocab& vocab, const GenerationConfig& cfg) {
    const BeamResult result = beam_search_ids(scorer, cfg);
    std::vector<int> ids;
    for (int id : result.ids) {
        if (id != bpe::kBosId && id != bpe::kEosId && id != bpe::kPadId) ids.push_back(id);
    }
    return vocab.decode(ids);
}

}  // namespace lemmarec::decode
