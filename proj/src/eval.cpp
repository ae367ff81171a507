#include "lemmarec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "lemmarec/errors.hpp"
#include "lemmarec/text.hpp"

namespace lemmarec::eval {

namespace {

// Wagner-Fischer with backtrace. Rows walk the label, columns the prediction,
// so an "up" move drops a label character (deletion) and a "left" move absorbs
// an extra prediction character (insertion).
CerBreakdown edit_script(const std::vector<char32_t>& label, const std::vector<char32_t>& pred) {
    const std::size_t n = label.size();
    const std::size_t m = pred.size();
    std::vector<std::int32_t> dist((n + 1) * (m + 1));
    auto d = [&](std::size_t i, std::size_t j) -> std::int32_t& { return dist[i * (m + 1) + j]; };

    for (std::size_t i = 0; i <= n; ++i) d(i, 0) = static_cast<std::int32_t>(i);
    for (std::size_t j = 0; j <= m; ++j) d(0, j) = static_cast<std::int32_t>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::int32_t sub = d(i - 1, j - 1) + (label[i - 1] == pred[j - 1] ? 0 : 1);
            const std::int32_t del = d(i - 1, j) + 1;
            const std::int32_t ins = d(i, j - 1) + 1;
            d(i, j) = std::min({sub, del, ins});
        }
    }

    CerBreakdown out;
    out.label_length = static_cast<std::int64_t>(n);
    std::size_t i = n;
    std::size_t j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            const std::int32_t sub = d(i - 1, j - 1) + (label[i - 1] == pred[j - 1] ? 0 : 1);
            if (sub == d(i, j)) {
                if (label[i - 1] == pred[j - 1]) {
                    ++out.correct;
                } else {
                    ++out.substitutions;
                }
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && d(i - 1, j) + 1 == d(i, j)) {
            ++out.deletions;
            --i;
            continue;
        }
        ++out.insertions;
        --j;
    }
    return out;
}

double quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

struct BucketAccum {
    std::int64_t count = 0;
    double sum = 0.0;
};

}  // namespace

CerBreakdown cer(const std::string& prediction, const std::string& label) {
    const auto label_cps = text::decode_utf8(text::nfc_normalize(label));
    if (label_cps.empty()) throw ValidationError("CER is undefined for an empty label");
    const auto pred_cps = text::decode_utf8(text::nfc_normalize(prediction));
    return edit_script(label_cps, pred_cps);
}

std::int64_t edit_distance(const std::string& a, const std::string& b) {
    const auto ca = text::decode_utf8(text::nfc_normalize(a));
    const auto cb = text::decode_utf8(text::nfc_normalize(b));
    return edit_script(ca, cb).edits();
}

double weighted_cer(const WeightedCerInput& input) {
    if (input.label_lengths.empty() || input.label_lengths.size() != input.cers.size()) {
        throw ValidationError("weighted CER needs a non-empty, aligned (length, CER) list");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < input.cers.size(); ++i) {
        if (input.label_lengths[i] < 1) throw ValidationError("weighted CER label lengths must be >= 1");
        num += static_cast<double>(input.label_lengths[i]) * input.cers[i];
        den += static_cast<double>(input.label_lengths[i]);
    }
    return num / den;
}

double exact_match_rate(const std::vector<Pair>& pairs) {
    if (pairs.empty()) throw ValidationError("exact match rate over an empty set");
    std::int64_t hits = 0;
    for (const auto& p : pairs) {
        if (text::nfc_normalize(p.prediction) == text::nfc_normalize(p.label)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

std::string normalize_external_prediction(const std::string& text) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    std::size_t begin = 0;
    while (begin < text.size() && is_space(text[begin])) ++begin;
    std::size_t end = begin;
    while (end < text.size() && !is_space(text[end]) && text[end] != '-' && text[end] != '(') ++end;
    while (end > begin && is_space(text[end - 1])) --end;
    return text.substr(begin, end - begin);
}

EvalReport evaluate_pairs(const std::vector<Pair>& pairs) {
    if (pairs.empty()) throw ValidationError("cannot evaluate an empty pair list");

    EvalReport report;
    report.num_samples = static_cast<std::int64_t>(pairs.size());
    report.per_example_cer.reserve(pairs.size());

    std::int64_t total_edits = 0;
    std::int64_t total_chars = 0;
    std::int64_t exact = 0;
    std::unordered_map<std::string, std::int64_t> label_freq;
    for (const auto& p : pairs) ++label_freq[text::nfc_normalize(p.label)];

    std::map<std::string, BucketAccum> len_buckets;
    std::map<std::string, BucketAccum> freq_buckets;
    auto length_bucket = [](std::int64_t len) -> std::string {
        if (len <= 3) return "1-3";
        if (len <= 6) return "4-6";
        if (len <= 9) return "7-9";
        return "10+";
    };
    auto frequency_bucket = [](std::int64_t freq) -> std::string {
        if (freq <= 1) return "1";
        if (freq <= 10) return "2-10";
        return ">10";
    };

    double sum_cer = 0.0;
    for (const auto& p : pairs) {
        const CerBreakdown b = cer(p.prediction, p.label);
        const double c = b.cer();
        report.per_example_cer.push_back(c);
        sum_cer += c;
        total_edits += b.edits();
        total_chars += b.label_length;
        const std::string norm_label = text::nfc_normalize(p.label);
        if (text::nfc_normalize(p.prediction) == norm_label) ++exact;
        auto& lb = len_buckets[length_bucket(b.label_length)];
        ++lb.count;
        lb.sum += c;
        auto& fb = freq_buckets[frequency_bucket(label_freq[norm_label])];
        ++fb.count;
        fb.sum += c;
    }

    report.mean_cer = sum_cer / static_cast<double>(pairs.size());
    report.weighted_cer = static_cast<double>(total_edits) / static_cast<double>(total_chars);
    report.exact_match = static_cast<double>(exact) / static_cast<double>(pairs.size());

    std::vector<double> sorted = report.per_example_cer;
    std::sort(sorted.begin(), sorted.end());
    report.cer_min = sorted.front();
    report.cer_q1 = quantile(sorted, 0.25);
    report.cer_median = quantile(sorted, 0.5);
    report.cer_q3 = quantile(sorted, 0.75);
    report.cer_max = sorted.back();
    double var = 0.0;
    for (double c : report.per_example_cer) {
        const double d = c - report.mean_cer;
        var += d * d;
    }
    report.cer_stddev = std::sqrt(var / static_cast<double>(pairs.size()));

    for (const char* name : {"1-3", "4-6", "7-9", "10+"}) {
        if (auto it = len_buckets.find(name); it != len_buckets.end()) {
            report.by_length.push_back({name, it->second.count, it->second.sum / it->second.count});
        }
    }
    for (const char* name : {"1", "2-10", ">10"}) {
        if (auto it = freq_buckets.find(name); it != freq_buckets.end()) {
            report.by_frequency.push_back({name, it->second.count, it->second.sum / it->second.count});
        }
    }
    return report;
}

ComparisonResult compare_systems(const std::vector<std::pair<std::string, std::string>>& ours,
                                 const std::vector<std::pair<std::string, std::string>>& external,
                                 const std::vector<std::pair<std::string, std::string>>& labels) {
    auto index = [](const std::vector<std::pair<std::string, std::string>>& kv) {
        std::unordered_map<std::string, std::string> m;
        for (const auto& [k, v] : kv) m[k] = v;
        return m;
    };
    const auto ours_by_id = index(ours);
    const auto ext_by_id = index(external);

    std::string missing;
    for (const auto& [id, label] : labels) {
        (void)label;
        if (!ours_by_id.count(id)) missing += " ours:" + id;
        if (!ext_by_id.count(id)) missing += " external:" + id;
    }
    if (!missing.empty()) throw ValidationError("prediction ids missing for labels:" + missing);

    std::vector<Pair> ours_pairs;
    std::vector<Pair> ext_pairs;
    ours_pairs.reserve(labels.size());
    ext_pairs.reserve(labels.size());
    for (const auto& [id, label] : labels) {
        ours_pairs.push_back({id, ours_by_id.at(id), label});
        ext_pairs.push_back({id, normalize_external_prediction(ext_by_id.at(id)), label});
    }

    ComparisonResult result;
    result.ours = evaluate_pairs(ours_pairs);
    result.external = evaluate_pairs(ext_pairs);
    result.distribution.reserve(labels.size() * 2);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        result.distribution.push_back({"ours", labels[i].first, result.ours.per_example_cer[i]});
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        result.distribution.push_back({"external", labels[i].first, result.external.per_example_cer[i]});
    }
    return result;
}

}  // namespace lemmarec::eval
