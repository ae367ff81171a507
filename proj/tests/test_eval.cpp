#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "lemmarec/errors.hpp"
#include "lemmarec/eval.hpp"
#include "lemmarec/rng.hpp"

using namespace lemmarec;
using lemmarec::eval::CerBreakdown;

namespace {

// Independent distance-only oracle (no backtrace, plain recurrence on bytes;
// inputs in these tests are ASCII so code points == bytes).
std::int64_t oracle_distance(const std::string& a, const std::string& b) {
    std::vector<std::int64_t> prev(b.size() + 1);
    std::vector<std::int64_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<std::int64_t>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<std::int64_t>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = std::min({prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1), prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string random_word(Rng& rng, int max_len, int alphabet, bool allow_empty) {
    const int len = static_cast<int>(rng.uniform_int(allow_empty ? 0 : 1, max_len));
    std::string s;
    for (int i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng.uniform_int(0, alphabet - 1)));
    return s;
}

}  // namespace

TEST_CASE("cer identity") {
    const CerBreakdown b = eval::cer("salus", "salus");
    CHECK(b.substitutions == 0);
    CHECK(b.deletions == 0);
    CHECK(b.insertions == 0);
    CHECK(b.correct == 5);
    CHECK(b.label_length == 5);
    CHECK(b.cer() == 0.0);
}

TEST_CASE("cer single missing character") {
    const CerBreakdown b = eval::cer("salu", "salus");
    CHECK(b.edits() == 1);
    CHECK(b.cer() == doctest::Approx(0.2));
    CHECK(b.label_length == b.substitutions + b.deletions + b.correct);
}

TEST_CASE("cer can exceed 1: extra predicted characters") {
    const CerBreakdown b = eval::cer("aaaa", "a");
    CHECK(b.insertions == 3);
    CHECK(b.correct == 1);
    CHECK(b.cer() == doctest::Approx(3.0));
    CHECK(b.label_length == 1);
}

TEST_CASE("cer rejects empty labels") { CHECK_THROWS_AS(eval::cer("x", ""), ValidationError); }

TEST_CASE("cer counts satisfy the breakdown invariants on random pairs") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const std::string pred = random_word(rng, 12, 8, true);
        const std::string label = random_word(rng, 12, 8, false);
        const CerBreakdown b = eval::cer(pred, label);
        CHECK(b.label_length == b.substitutions + b.deletions + b.correct);
        CHECK(b.edits() == oracle_distance(pred, label));
        CHECK(b.substitutions >= 0);
        CHECK(b.deletions >= 0);
        CHECK(b.insertions >= 0);
        // prediction length identity: every prediction char is inserted,
        // substituted, or correct
        CHECK(static_cast<std::int64_t>(pred.size()) == b.insertions + b.substitutions + b.correct);
    }
}

TEST_CASE("edit distance is symmetric and satisfies the triangle inequality") {
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const std::string a = random_word(rng, 10, 6, true);
        const std::string b = random_word(rng, 10, 6, true);
        const std::string c = random_word(rng, 10, 6, true);
        CHECK(eval::edit_distance(a, b) == eval::edit_distance(b, a));
        CHECK(eval::edit_distance(a, c) <= eval::edit_distance(a, b) + eval::edit_distance(b, c));
    }
}

TEST_CASE("cer is zero iff strings match") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const std::string pred = random_word(rng, 8, 4, true);
        const std::string label = random_word(rng, 8, 4, false);
        const CerBreakdown b = eval::cer(pred, label);
        CHECK((b.cer() == 0.0) == (pred == label));
    }
}

TEST_CASE("weighted cer: direct formula") {
    eval::WeightedCerInput input;
    input.label_lengths = {4, 8};
    input.cers = {0.25, 0.0};
    CHECK(eval::weighted_cer(input) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("weighted cer equals the unweighted mean for equal lengths") {
    eval::WeightedCerInput input;
    input.label_lengths = {5, 5, 5};
    input.cers = {0.2, 0.4, 0.9};
    CHECK(eval::weighted_cer(input) == doctest::Approx((0.2 + 0.4 + 0.9) / 3.0).epsilon(1e-12));
}

TEST_CASE("weighted cer of a single example is its cer") {
    eval::WeightedCerInput input;
    input.label_lengths = {7};
    input.cers = {0.42};
    CHECK(eval::weighted_cer(input) == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("weighted cer rejects degenerate inputs") {
    eval::WeightedCerInput bad;
    CHECK_THROWS_AS(eval::weighted_cer(bad), ValidationError);
    bad.label_lengths = {0};
    bad.cers = {0.5};
    CHECK_THROWS_AS(eval::weighted_cer(bad), ValidationError);
}

TEST_CASE("exact match rate") {
    std::vector<eval::Pair> pairs;
    for (int i = 0; i < 10; ++i) {
        const bool hit = i < 7;
        pairs.push_back({std::to_string(i), hit ? "salus" : "error", "salus"});
    }
    CHECK(eval::exact_match_rate(pairs) == doctest::Approx(0.7));
    std::vector<eval::Pair> all{{"a", "x", "x"}};
    CHECK(eval::exact_match_rate(all) == 1.0);
    std::vector<eval::Pair> none{{"a", "x", "y"}};
    CHECK(eval::exact_match_rate(none) == 0.0);
}

TEST_CASE("external prediction normalization") {
    CHECK(eval::normalize_external_prediction("salus (vide") == "salus");
    CHECK(eval::normalize_external_prediction("sal-tus extra") == "sal");
    CHECK(eval::normalize_external_prediction("salus") == "salus");
    CHECK(eval::normalize_external_prediction("  salus  ") == "salus");
    CHECK(eval::normalize_external_prediction("") == "");
}

TEST_CASE("report satisfies the weighted-cer identity") {
    Rng rng(31);
    std::vector<eval::Pair> pairs;
    for (int i = 0; i < 60; ++i) {
        pairs.push_back({std::to_string(i), random_word(rng, 9, 5, true), random_word(rng, 9, 5, false)});
    }
    const eval::EvalReport report = eval::evaluate_pairs(pairs);
    std::int64_t edits = 0;
    std::int64_t chars = 0;
    for (const auto& p : pairs) {
        const CerBreakdown b = eval::cer(p.prediction, p.label);
        edits += b.edits();
        chars += b.label_length;
    }
    CHECK(report.weighted_cer == doctest::Approx(static_cast<double>(edits) / chars).epsilon(1e-12));
    CHECK(report.num_samples == 60);
    CHECK(report.cer_min <= report.cer_q1);
    CHECK(report.cer_q1 <= report.cer_median);
    CHECK(report.cer_median <= report.cer_q3);
    CHECK(report.cer_q3 <= report.cer_max);
}

TEST_CASE("compare_systems on identical files yields identical reports") {
    std::vector<std::pair<std::string, std::string>> labels{{"a", "salus"}, {"b", "vita"}, {"c", "mors"}};
    std::vector<std::pair<std::string, std::string>> preds{{"a", "salus"}, {"b", "vita"}, {"c", "mens"}};
    const auto result = eval::compare_systems(preds, preds, labels);
    CHECK(result.ours.mean_cer == result.external.mean_cer);
    CHECK(result.ours.weighted_cer == result.external.weighted_cer);
    CHECK(result.ours.exact_match == result.external.exact_match);
    CHECK(result.distribution.size() == 6);
}

TEST_CASE("compare_systems normalizes the external predictions") {
    std::vector<std::pair<std::string, std::string>> labels{{"a", "salus"}};
    std::vector<std::pair<std::string, std::string>> ours{{"a", "salus"}};
    std::vector<std::pair<std::string, std::string>> external{{"a", "salus (vide supra"}};
    const auto result = eval::compare_systems(ours, external, labels);
    CHECK(result.external.mean_cer == 0.0);
}

TEST_CASE("compare_systems dominance: strictly better per-sample implies better aggregates") {
    std::vector<std::pair<std::string, std::string>> labels;
    std::vector<std::pair<std::string, std::string>> sys_a;
    std::vector<std::pair<std::string, std::string>> sys_b;
    Rng rng(77);
    for (int i = 0; i < 40; ++i) {
        const std::string id = "s" + std::to_string(i);
        const std::string label = random_word(rng, 9, 5, false);
        labels.emplace_back(id, label);
        sys_a.emplace_back(id, label);  // perfect
        std::string worse = label;
        worse.push_back('z');  // one guaranteed edit
        sys_b.emplace_back(id, worse);
    }
    const auto result = eval::compare_systems(sys_a, sys_b, labels);
    CHECK(result.ours.mean_cer < result.external.mean_cer);
    CHECK(result.ours.weighted_cer < result.external.weighted_cer);
    CHECK(result.ours.cer_max <= result.external.cer_max);
}

TEST_CASE("compare_systems reports missing ids") {
    std::vector<std::pair<std::string, std::string>> labels{{"a", "salus"}, {"b", "vita"}};
    std::vector<std::pair<std::string, std::string>> ours{{"a", "salus"}};
    std::vector<std::pair<std::string, std::string>> external{{"a", "salus"}, {"b", "vita"}};
    CHECK_THROWS_WITH_AS(eval::compare_systems(ours, external, labels),
                         doctest::Contains("ours:b"), ValidationError);
}
