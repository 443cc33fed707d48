#include "mpjudge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mpjudge/error.hpp"
#include "mpjudge/rng.hpp"

namespace mpjudge {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::map<std::string, std::size_t> pair_index_of(const Benchmark& bench) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < bench.pairs.size(); ++i) index[bench.pairs[i].pair_id] = i;
    return index;
}

/// Predictions must cover the benchmark exactly once each.
void check_alignment(const std::vector<Prediction>& preds, const Benchmark& bench,
                     const std::map<std::string, std::size_t>& index) {
    if (preds.size() != bench.pairs.size())
        throw config_error("prediction set covers " + std::to_string(preds.size()) + " of " +
                           std::to_string(bench.pairs.size()) + " pairs");
    std::set<std::string> seen;
    for (const auto& pred : preds) {
        if (index.find(pred.pair_id) == index.end())
            throw config_error("prediction for unknown pair \"" + pred.pair_id + "\"");
        if (!seen.insert(pred.pair_id).second)
            throw config_error("duplicate prediction for pair \"" + pred.pair_id + "\"");
    }
}

struct Tally {
    std::size_t n = 0;
    std::size_t correct = 0;

    void add(bool ok) {
        ++n;
        if (ok) ++correct;
    }
    double rate() const { return static_cast<double>(correct) / static_cast<double>(n); }
};

long floor_div(long a, long b) {
    long q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

AccuracyReport accuracy(const std::vector<std::vector<Prediction>>& runs, const Benchmark& bench,
                        const ParadigmGroupMap* groups) {
    if (runs.empty()) throw config_error("no prediction runs supplied");
    auto index = pair_index_of(bench);

    AccuracyReport report;
    std::map<std::string, Tally> paradigm_tally, phenomenon_tally, group_tally;
    std::vector<double> run_accuracies;

    if (groups) {
        for (const auto& [label, uids] : groups->groups) {
            for (const auto& uid : uids)
                if (bench.paradigm_index.find(uid) == bench.paradigm_index.end())
                    throw config_error("group \"" + label + "\" references unknown paradigm \"" +
                                       uid + "\"");
            group_tally[label];  // groups with no matching pairs stay reported
        }
    }

    for (const auto& run : runs) {
        check_alignment(run, bench, index);
        Tally run_tally;
        for (const auto& pred : run) {
            const auto& pair = bench.pairs[index.at(pred.pair_id)];
            run_tally.add(pred.correct);
            paradigm_tally[pair.paradigm_uid].add(pred.correct);
            phenomenon_tally[pair.phenomenon].add(pred.correct);
            if (groups) {
                for (const auto& [label, uids] : groups->groups)
                    if (uids.count(pair.paradigm_uid)) group_tally[label].add(pred.correct);
            }
        }
        double acc = run_tally.rate();
        run_accuracies.push_back(acc);
        report.n_pairs += run_tally.n;
        report.n_correct += run_tally.correct;
        const std::string& tid = run.front().template_id;
        if (!tid.empty()) {
            if (!report.by_template.emplace(tid, acc).second)
                throw config_error("two runs share template_id \"" + tid + "\"");
        }
    }

    report.overall = static_cast<double>(report.n_correct) / static_cast<double>(report.n_pairs);
    for (const auto& [uid, tally] : paradigm_tally) report.by_paradigm[uid] = tally.rate();
    for (const auto& [ph, tally] : phenomenon_tally) report.by_phenomenon[ph] = tally.rate();
    if (groups) {
        for (const auto& [label, tally] : group_tally) {
            report.by_group[label] =
                tally.n == 0 ? std::nullopt : std::optional<double>(tally.rate());
            report.group_sizes[label] = tally.n / runs.size();
        }
    }

    double mean = 0.0;
    for (double a : run_accuracies) mean += a;
    mean /= static_cast<double>(run_accuracies.size());
    double var = 0.0;
    for (double a : run_accuracies) var += (a - mean) * (a - mean);
    var /= static_cast<double>(run_accuracies.size());
    report.mean_over_templates = mean;
    report.std_over_templates = std::sqrt(var);
    report.max_over_templates = *std::max_element(run_accuracies.begin(), run_accuracies.end());
    return report;
}

double paired_bootstrap(const std::vector<Prediction>& pred_a,
                        const std::vector<Prediction>& pred_b, int resamples,
                        std::size_t sample_size, std::uint64_t seed) {
    if (resamples < 1) throw config_error("bootstrap needs at least one resample");
    if (pred_a.size() != pred_b.size() || pred_a.empty())
        throw config_error("bootstrap prediction sets are misaligned");
    const std::size_t n = pred_a.size();
    std::vector<char> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (pred_a[i].pair_id != pred_b[i].pair_id)
            throw config_error("bootstrap prediction sets are misaligned at pair \"" +
                               pred_a[i].pair_id + "\"");
        a[i] = pred_a[i].correct ? 1 : 0;
        b[i] = pred_b[i].correct ? 1 : 0;
    }
    const std::size_t size = sample_size == 0 ? n : sample_size;

    int not_better = 0;
    for (int r = 0; r < resamples; ++r) {
        DetRng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        long count_a = 0, count_b = 0;
        for (std::size_t k = 0; k < size; ++k) {
            std::size_t i = static_cast<std::size_t>(rng.below(n));
            count_a += a[i];
            count_b += b[i];
        }
        if (count_a <= count_b) ++not_better;
    }
    return static_cast<double>(not_better) / static_cast<double>(resamples);
}

std::vector<LengthBiasRecord> length_bias_records(const std::vector<Prediction>& preds) {
    std::vector<LengthBiasRecord> records;
    records.reserve(preds.size());
    for (const auto& pred : preds)
        records.push_back(
            {pred.pair_id, pred.token_len_good - pred.token_len_bad, pred.correct ? 1 : 0});
    return records;
}

std::optional<double> point_biserial(const std::vector<LengthBiasRecord>& records) {
    std::vector<double> x, y;
    x.reserve(records.size());
    y.reserve(records.size());
    for (const auto& rec : records) {
        x.push_back(static_cast<double>(rec.length_diff));
        y.push_back(static_cast<double>(rec.success));
    }
    return pearson(x, y);
}

std::vector<LengthBin> accuracy_by_length_diff(const std::vector<LengthBiasRecord>& records,
                                               long bin_width) {
    if (bin_width < 1) throw config_error("bin width must be >= 1");
    std::map<long, Tally> bins;
    for (const auto& rec : records) bins[floor_div(rec.length_diff, bin_width)].add(rec.success);

    std::vector<LengthBin> out;
    out.reserve(bins.size());
    for (const auto& [idx, tally] : bins) {
        LengthBin bin;
        bin.lo = idx * bin_width;
        bin.hi = bin.lo + bin_width - 1;
        bin.n = tally.n;
        bin.n_success = tally.correct;
        bin.accuracy = tally.rate();
        std::tie(bin.wilson_lo, bin.wilson_hi) = wilson_interval(tally.correct, tally.n);
        out.push_back(bin);
    }
    return out;
}

SplitAccuracy word_shuffling_split(const std::vector<Prediction>& preds, const Benchmark& bench,
                                   const std::map<std::string, bool>& classification) {
    auto index = pair_index_of(bench);
    Tally shuffling, other;
    for (const auto& pred : preds) {
        auto it = index.find(pred.pair_id);
        if (it == index.end())
            throw config_error("prediction for unknown pair \"" + pred.pair_id + "\"");
        const auto& uid = bench.pairs[it->second].paradigm_uid;
        auto cls = classification.find(uid);
        if (cls == classification.end())
            throw config_error("paradigm \"" + uid + "\" missing from classification");
        (cls->second ? shuffling : other).add(pred.correct);
    }
    SplitAccuracy split;
    split.n_shuffling = shuffling.n;
    split.n_other = other.n;
    if (shuffling.n > 0) split.shuffling = shuffling.rate();
    if (other.n > 0) split.other = other.rate();
    return split;
}

double a_proportion(const std::vector<std::vector<Prediction>>& ab_runs) {
    if (ab_runs.empty()) throw config_error("no A/B runs supplied");
    double sum = 0.0;
    for (const auto& run : ab_runs) {
        if (run.empty()) throw config_error("empty A/B run");
        std::size_t n_a = 0;
        for (const auto& pred : run) {
            if (!pred.aux.is_object() || !pred.aux.contains("choice"))
                throw config_error("prediction for pair \"" + pred.pair_id +
                                   "\" has no A/B choice");
            if (pred.aux["choice"] == "A") ++n_a;
        }
        sum += static_cast<double>(n_a) / static_cast<double>(run.size());
    }
    return sum / static_cast<double>(ab_runs.size());
}

ScatterResult accuracy_diff_vs_length_diff(const std::vector<Prediction>& preds_a,
                                           const std::vector<Prediction>& preds_b,
                                           const Benchmark& bench) {
    auto index = pair_index_of(bench);
    check_alignment(preds_a, bench, index);
    check_alignment(preds_b, bench, index);

    std::map<std::string, Tally> tally_a, tally_b;
    std::map<std::string, std::pair<double, std::size_t>> length_sums;
    for (const auto& pred : preds_a) {
        const auto& pair = bench.pairs[index.at(pred.pair_id)];
        tally_a[pair.paradigm_uid].add(pred.correct);
        auto& [sum, count] = length_sums[pair.paradigm_uid];
        sum += static_cast<double>(pred.token_len_good - pred.token_len_bad);
        ++count;
    }
    for (const auto& pred : preds_b)
        tally_b[bench.pairs[index.at(pred.pair_id)].paradigm_uid].add(pred.correct);

    ScatterResult result;
    std::vector<double> x, y;
    for (const auto& [uid, ta] : tally_a) {
        ParadigmScatterPoint point;
        point.paradigm_uid = uid;
        const auto& [sum, count] = length_sums.at(uid);
        point.mean_length_diff = sum / static_cast<double>(count);
        point.accuracy_diff = ta.rate() - tally_b.at(uid).rate();
        x.push_back(point.mean_length_diff);
        y.push_back(point.accuracy_diff);
        result.points.push_back(std::move(point));
    }
    result.pearson_r = pearson(x, y);
    return result;
}

std::map<std::string, GroupAccuracy> group_accuracy(const std::vector<Prediction>& preds,
                                                    const Benchmark& bench,
                                                    const ParadigmGroupMap& groups) {
    auto index = pair_index_of(bench);
    for (const auto& [label, uids] : groups.groups)
        for (const auto& uid : uids)
            if (bench.paradigm_index.find(uid) == bench.paradigm_index.end())
                throw config_error("group \"" + label + "\" references unknown paradigm \"" + uid +
                                   "\"");

    std::map<std::string, Tally> tallies;
    for (const auto& [label, uids] : groups.groups) tallies[label];
    for (const auto& pred : preds) {
        auto it = index.find(pred.pair_id);
        if (it == index.end())
            throw config_error("prediction for unknown pair \"" + pred.pair_id + "\"");
        const auto& uid = bench.pairs[it->second].paradigm_uid;
        for (const auto& [label, uids] : groups.groups)
            if (uids.count(uid)) tallies[label].add(pred.correct);
    }

    std::map<std::string, GroupAccuracy> out;
    for (const auto& [label, tally] : tallies) {
        GroupAccuracy acc;
        acc.n_pairs = tally.n;
        if (tally.n > 0) acc.accuracy = tally.rate();
        out[label] = acc;
    }
    return out;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw config_error("correlation inputs differ in length");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n) {
    if (n == 0) return {0.0, 1.0};
    double nn = static_cast<double>(n);
    double p = static_cast<double>(successes) / nn;
    double z2 = kZ95 * kZ95;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double half = kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {center - half, center + half};
}

}  // namespace mpjudge
