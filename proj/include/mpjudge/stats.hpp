#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpjudge/benchmark.hpp"
#include "mpjudge/judge.hpp"

namespace mpjudge {

/// Accuracies pooled over the supplied runs plus the over-template spread.
/// Group accuracies with no pairs are reported as absent, never as zero.
struct AccuracyReport {
    double overall = 0.0;
    std::size_t n_pairs = 0;
    std::size_t n_correct = 0;
    std::map<std::string, double> by_template;   // template_id -> that run's accuracy
    std::map<std::string, double> by_paradigm;   // pooled over runs
    std::map<std::string, double> by_phenomenon;
    std::map<std::string, std::optional<double>> by_group;
    std::map<std::string, std::size_t> group_sizes;
    double mean_over_templates = 0.0;
    double std_over_templates = 0.0;  // population std over per-template accuracies
    double max_over_templates = 0.0;
};

AccuracyReport accuracy(const std::vector<std::vector<Prediction>>& runs, const Benchmark& bench,
                        const ParadigmGroupMap* groups = nullptr);

/// Paired bootstrap: p-value for "a is significantly more accurate than b".
/// Each resample draws sample_size indices with replacement (0 = set size)
/// and p is the fraction of resamples where accuracy(a) <= accuracy(b); equal
/// resampled accuracies count against superiority.
double paired_bootstrap(const std::vector<Prediction>& pred_a,
                        const std::vector<Prediction>& pred_b, int resamples,
                        std::size_t sample_size, std::uint64_t seed);

/// Token-length difference (acceptable minus unacceptable) and success flag
/// of one pair, taken from a Prediction (same backend as the judging run).
struct LengthBiasRecord {
    std::string pair_id;
    long length_diff = 0;
    int success = 0;
};

std::vector<LengthBiasRecord> length_bias_records(const std::vector<Prediction>& preds);

/// Point-biserial correlation between success and length_diff (identical to
/// Pearson on the 0/1 variable). Degenerate variance -> nullopt.
std::optional<double> point_biserial(const std::vector<LengthBiasRecord>& records);

struct LengthBin {
    long lo = 0;  // inclusive
    long hi = 0;  // inclusive
    std::size_t n = 0;
    std::size_t n_success = 0;
    double accuracy = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
};

/// Accuracy per length_diff bin with 95% Wilson intervals. bin_width is the
/// number of consecutive integer differences pooled per bin.
std::vector<LengthBin> accuracy_by_length_diff(const std::vector<LengthBiasRecord>& records,
                                               long bin_width = 1);

struct SplitAccuracy {
    std::optional<double> shuffling;
    std::optional<double> other;
    std::size_t n_shuffling = 0;
    std::size_t n_other = 0;
};

/// Accuracy over word-shuffling paradigms vs. all others.
SplitAccuracy word_shuffling_split(const std::vector<Prediction>& preds, const Benchmark& bench,
                                   const std::map<std::string, bool>& classification);

/// Fraction of raw "A" choices in A/B prompting runs, averaged over runs.
double a_proportion(const std::vector<std::vector<Prediction>>& ab_runs);

struct ParadigmScatterPoint {
    std::string paradigm_uid;
    double mean_length_diff = 0.0;
    double accuracy_diff = 0.0;  // accuracy_a - accuracy_b
};

struct ScatterResult {
    std::vector<ParadigmScatterPoint> points;
    std::optional<double> pearson_r;  // nullopt when degenerate
};

/// Per-paradigm (mean length_diff, accuracy difference) scatter between two
/// aligned prediction sets, annotated with Pearson r.
ScatterResult accuracy_diff_vs_length_diff(const std::vector<Prediction>& preds_a,
                                           const std::vector<Prediction>& preds_b,
                                           const Benchmark& bench);

struct GroupAccuracy {
    std::optional<double> accuracy;  // absent when the group has no pairs
    std::size_t n_pairs = 0;
};

/// Accuracy restricted to each group's paradigms. Every uid in the map must
/// exist in the benchmark.
std::map<std::string, GroupAccuracy> group_accuracy(const std::vector<Prediction>& preds,
                                                    const Benchmark& bench,
                                                    const ParadigmGroupMap& groups);

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

/// 95% Wilson score interval bounds for k successes out of n.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n);

}  // namespace mpjudge
