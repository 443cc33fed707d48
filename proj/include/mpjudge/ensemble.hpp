#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpjudge/judge.hpp"

namespace mpjudge {

/// Per-pair predicted indices of one (method, template) run, aligned to a
/// benchmark. predicted[i] == 0 means the acceptable sentence was chosen.
struct PredictionSet {
    std::string method_id;
    std::string template_id;
    std::vector<std::string> pair_ids;
    std::vector<int> predicted;
};

PredictionSet prediction_set_from(const std::vector<Prediction>& preds);

/// Fraction of pairs where the acceptable sentence was predicted.
double set_accuracy(const PredictionSet& set);

/// Per-pair majority over exactly five aligned sets (odd count, so binary
/// votes can never tie).
PredictionSet majority_vote(const std::vector<PredictionSet>& sets);

/// One mixing setting: n_from_L + n_from_P == 5 sets drawn per trial.
struct EnsembleSpec {
    int n_from_L = 0;
    int n_from_P = 5;
    int trials = 10;
    std::uint64_t seed = 0;

    std::string label() const;
};

struct EnsembleResult {
    std::string label;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<double> per_trial;
};

/// Per trial, draw n_from_L sets from pool_L and n_from_P from pool_P
/// uniformly without replacement (stratified; trial RNG derived from
/// (seed, trial) so parallel evaluation cannot change results), majority-vote
/// the five, and score. Pools must hold exactly five sets each.
EnsembleResult run_ensemble(const std::vector<PredictionSet>& pool_L,
                            const std::vector<PredictionSet>& pool_P, const EnsembleSpec& spec);

}  // namespace mpjudge
