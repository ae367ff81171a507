#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lemmarec::eval {

// Edit-operation counts for one (prediction, label) pair, counted against the
// label: every label character is either substituted, deleted, or correct
// (N = S + D + C), and insertions are the prediction's extra characters.
// CER = (S + D + I) / N, which may exceed 1.
struct CerBreakdown {
    std::int64_t substitutions = 0;
    std::int64_t deletions = 0;
    std::int64_t insertions = 0;
    std::int64_t correct = 0;
    std::int64_t label_length = 0;

    std::int64_t edits() const { return substitutions + deletions + insertions; }
    double cer() const { return static_cast<double>(edits()) / static_cast<double>(label_length); }
};

// Minimal unit-cost edit script between prediction and label, compared at
// Unicode code-point granularity after NFC normalization. Ties in the DP
// backtrace prefer substitution over deletion over insertion; the total
// S + D + I is unique regardless. Empty labels are an error (N divides).
CerBreakdown cer(const std::string& prediction, const std::string& label);

// Plain Levenshtein distance on code points (same costs as `cer`).
std::int64_t edit_distance(const std::string& a, const std::string& b);

struct WeightedCerInput {
    std::vector<std::int64_t> label_lengths;
    std::vector<double> cers;
};

// Length-weighted corpus average: sum(l_i * CER_i) / sum(l_i).
double weighted_cer(const WeightedCerInput& input);

struct Pair {
    std::string id;
    std::string prediction;
    std::string label;
};

double exact_match_rate(const std::vector<Pair>& pairs);

// Truncate at the first whitespace, '-' or '(' and trim surrounding
// whitespace; applied to external OCR output before comparison.
std::string normalize_external_prediction(const std::string& text);

struct BucketStat {
    std::string name;
    std::int64_t count = 0;
    double mean_cer = 0.0;
};

struct EvalReport {
    std::int64_t num_samples = 0;
    double mean_cer = 0.0;      // mean of per-example CERs
    double weighted_cer = 0.0;  // total edits / total label characters
    double exact_match = 0.0;
    double cer_min = 0.0;
    double cer_q1 = 0.0;
    double cer_median = 0.0;
    double cer_q3 = 0.0;
    double cer_max = 0.0;
    double cer_stddev = 0.0;
    std::vector<BucketStat> by_length;     // label length buckets
    std::vector<BucketStat> by_frequency;  // label multiplicity buckets
    std::vector<double> per_example_cer;   // aligned with the input pair order
};

// Per-example CERs plus corpus aggregates. The weighted CER is accumulated as
// integer edit and length totals with a single final division, so the Eq. 2
// identity (weighted CER == total edits / total label chars) holds exactly.
EvalReport evaluate_pairs(const std::vector<Pair>& pairs);

struct DistributionRow {
    std::string system;
    std::string id;
    double cer = 0.0;
};

struct ComparisonResult {
    EvalReport ours;
    EvalReport external;
    std::vector<DistributionRow> distribution;  // long format, for plotting
};

// Joins two prediction sets against shared labels by id. External predictions
// are passed through normalize_external_prediction first. Missing or extra
// ids raise a ValidationError listing them.
ComparisonResult compare_systems(const std::vector<std::pair<std::string, std::string>>& ours,
                                 const std::vector<std::pair<std::string, std::string>>& external,
                                 const std::vector<std::pair<std::string, std::string>>& labels);

}  // namespace lemmarec::eval
