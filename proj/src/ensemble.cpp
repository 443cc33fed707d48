#include "mpjudge/ensemble.hpp"

#include <cmath>

#include "mpjudge/error.hpp"
#include "mpjudge/rng.hpp"

namespace mpjudge {

PredictionSet prediction_set_from(const std::vector<Prediction>& preds) {
    PredictionSet set;
    if (!preds.empty()) {
        set.method_id = preds.front().method_id;
        set.template_id = preds.front().template_id;
    }
    set.pair_ids.reserve(preds.size());
    set.predicted.reserve(preds.size());
    for (const auto& pred : preds) {
        set.pair_ids.push_back(pred.pair_id);
        set.predicted.push_back(pred.predicted_good_index);
    }
    return set;
}

double set_accuracy(const PredictionSet& set) {
    if (set.predicted.empty()) throw config_error("empty prediction set");
    std::size_t correct = 0;
    for (int idx : set.predicted)
        if (idx == 0) ++correct;
    return static_cast<double>(correct) / static_cast<double>(set.predicted.size());
}

PredictionSet majority_vote(const std::vector<PredictionSet>& sets) {
    if (sets.size() != 5) throw config_error("majority vote needs exactly 5 sets");
    const auto& first = sets.front();
    for (const auto& set : sets) {
        if (set.pair_ids != first.pair_ids)
            throw config_error("prediction sets are not aligned (pair ids differ)");
        if (set.predicted.size() != set.pair_ids.size())
            throw config_error("prediction set has mismatched lengths");
    }

    PredictionSet out;
    out.method_id = "ensemble";
    out.pair_ids = first.pair_ids;
    out.predicted.reserve(first.predicted.size());
    for (std::size_t i = 0; i < first.predicted.size(); ++i) {
        int ones = 0;
        for (const auto& set : sets) ones += set.predicted[i] == 1 ? 1 : 0;
        out.predicted.push_back(ones >= 3 ? 1 : 0);
    }
    return out;
}

std::string EnsembleSpec::label() const {
    return "L" + std::to_string(n_from_L) + ":P" + std::to_string(n_from_P);
}

namespace {

/// Draw k distinct indices from [0, pool) in selection order.
std::vector<std::size_t> sample_without_replacement(DetRng& rng, std::size_t pool, std::size_t k) {
    std::vector<std::size_t> indices(pool);
    for (std::size_t i = 0; i < pool; ++i) indices[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(pool - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    return indices;
}

}  // namespace

EnsembleResult run_ensemble(const std::vector<PredictionSet>& pool_L,
                            const std::vector<PredictionSet>& pool_P, const EnsembleSpec& spec) {
    if (spec.n_from_L < 0 || spec.n_from_P < 0 || spec.n_from_L + spec.n_from_P != 5)
        throw config_error("ensemble spec must draw exactly 5 sets");
    if (spec.trials < 1) throw config_error("ensemble needs at least one trial");
    if (spec.n_from_L > 0 && pool_L.size() != 5)
        throw config_error("L pool must hold exactly 5 sets");
    if (spec.n_from_P > 0 && pool_P.size() != 5)
        throw config_error("P pool must hold exactly 5 sets");

    EnsembleResult result;
    result.label = spec.label();
    result.per_trial.reserve(static_cast<std::size_t>(spec.trials));

    for (int trial = 0; trial < spec.trials; ++trial) {
        DetRng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(trial)));
        std::vector<PredictionSet> drawn;
        drawn.reserve(5);
        for (std::size_t i : sample_without_replacement(rng, pool_L.size(),
                                                        static_cast<std::size_t>(spec.n_from_L)))
            drawn.push_back(pool_L[i]);
        for (std::size_t i : sample_without_replacement(rng, pool_P.size(),
                                                        static_cast<std::size_t>(spec.n_from_P)))
            drawn.push_back(pool_P[i]);
        result.per_trial.push_back(set_accuracy(majority_vote(drawn)));
    }

    double mean = 0.0;
    for (double v : result.per_trial) mean += v;
    mean /= static_cast<double>(result.per_trial.size());
    double var = 0.0;
    for (double v : result.per_trial) var += (v - mean) * (v - mean);
    var /= static_cast<double>(result.per_trial.size());
    result.mean_accuracy = mean;
    result.std_accuracy = std::sqrt(var);
    return result;
}

}  // namespace mpjudge
