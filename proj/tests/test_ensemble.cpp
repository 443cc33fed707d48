#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mpjudge/ensemble.hpp"
#include "mpjudge/error.hpp"

using namespace mpjudge;

namespace {

PredictionSet make_set(const std::vector<int>& predicted, const std::string& tid = "") {
    PredictionSet set;
    set.method_id = "in_lp";
    set.template_id = tid;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        set.pair_ids.push_back("p" + std::to_string(i));
    set.predicted = predicted;
    return set;
}

std::vector<PredictionSet> five_copies(const std::vector<int>& predicted) {
    return std::vector<PredictionSet>(5, make_set(predicted));
}

}  // namespace

TEST_CASE("prediction sets carry ids and verdicts in order") {
    std::vector<Prediction> preds(3);
    preds[0].pair_id = "a";
    preds[0].predicted_good_index = 0;
    preds[0].method_id = "yes_no";
    preds[0].template_id = "t1";
    preds[1].pair_id = "b";
    preds[1].predicted_good_index = 1;
    preds[2].pair_id = "c";
    preds[2].predicted_good_index = 0;

    PredictionSet set = prediction_set_from(preds);
    CHECK(set.method_id == "yes_no");
    CHECK(set.template_id == "t1");
    CHECK(set.pair_ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(set.predicted == std::vector<int>{0, 1, 0});
    CHECK(set_accuracy(set) == doctest::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(set_accuracy(PredictionSet{}), Error);
}

TEST_CASE("majority vote matches a brute-force tally") {
    std::mt19937 gen(99);
    for (int draw = 0; draw < 100; ++draw) {
        const std::size_t n_pairs = 50;
        std::vector<PredictionSet> sets;
        for (int s = 0; s < 5; ++s) {
            std::vector<int> predicted(n_pairs);
            for (auto& v : predicted) v = static_cast<int>(gen() % 2);
            sets.push_back(make_set(predicted));
        }
        PredictionSet voted = majority_vote(sets);
        REQUIRE(voted.predicted.size() == n_pairs);
        for (std::size_t i = 0; i < n_pairs; ++i) {
            int ones = 0;
            for (const auto& set : sets) ones += set.predicted[i];
            CHECK(voted.predicted[i] == (ones > 2 ? 1 : 0));
        }
    }
}

TEST_CASE("majority vote requires five aligned sets") {
    auto sets = five_copies({0, 1, 0});
    CHECK(majority_vote(sets).predicted == std::vector<int>{0, 1, 0});

    sets.pop_back();
    CHECK_THROWS_AS(majority_vote(sets), Error);
    sets.push_back(make_set({0, 1, 0}));
    sets.push_back(make_set({0, 1, 0}));
    CHECK_THROWS_AS(majority_vote(sets), Error);

    auto misaligned = five_copies({0, 1, 0});
    misaligned[3].pair_ids[1] = "other";
    CHECK_THROWS_AS(majority_vote(misaligned), Error);
}

TEST_CASE("vote order does not matter") {
    std::vector<PredictionSet> sets = {make_set({0, 0, 1, 1}), make_set({0, 1, 1, 0}),
                                       make_set({1, 0, 0, 0}), make_set({1, 1, 1, 0}),
                                       make_set({0, 0, 1, 0})};
    PredictionSet forward = majority_vote(sets);
    std::reverse(sets.begin(), sets.end());
    PredictionSet reversed = majority_vote(sets);
    CHECK(forward.predicted == reversed.predicted);
    CHECK(forward.predicted == std::vector<int>{0, 0, 1, 0});
}

TEST_CASE("spec labels encode the pool mix") {
    CHECK(EnsembleSpec{0, 5, 10, 0}.label() == "L0:P5");
    CHECK(EnsembleSpec{3, 2, 10, 0}.label() == "L3:P2");
}

TEST_CASE("identical pools reproduce the single-set accuracy with zero spread") {
    auto pool = five_copies({0, 0, 1, 0});  // accuracy 0.75
    for (auto [nl, np] : std::vector<std::pair<int, int>>{{0, 5}, {2, 3}, {3, 2}, {5, 0}}) {
        CAPTURE(nl);
        EnsembleResult result = run_ensemble(pool, pool, {nl, np, 10, 42});
        CHECK(result.mean_accuracy == 0.75);
        CHECK(result.std_accuracy == 0.0);
        REQUIRE(result.per_trial.size() == 10);
        for (double v : result.per_trial) CHECK(v == 0.75);
    }
}

TEST_CASE("the stratified draw takes exactly the requested counts per pool") {
    auto pool_L = five_copies({0, 0, 0, 0});  // always votes for the acceptable one
    auto pool_P = five_copies({1, 1, 1, 1});  // always votes against

    EnsembleResult l_heavy = run_ensemble(pool_L, pool_P, {3, 2, 8, 1});
    CHECK(l_heavy.mean_accuracy == 1.0);
    EnsembleResult p_heavy = run_ensemble(pool_L, pool_P, {2, 3, 8, 1});
    CHECK(p_heavy.mean_accuracy == 0.0);
}

TEST_CASE("trials are seed-reproducible and mean/std summarize them") {
    std::mt19937 gen(7);
    auto random_pool = [&] {
        std::vector<PredictionSet> pool;
        for (int s = 0; s < 5; ++s) {
            std::vector<int> predicted(30);
            for (auto& v : predicted) v = static_cast<int>(gen() % 2);
            pool.push_back(make_set(predicted));
        }
        return pool;
    };
    auto pool_L = random_pool();
    auto pool_P = random_pool();

    EnsembleSpec spec{2, 3, 25, 1234};
    EnsembleResult first = run_ensemble(pool_L, pool_P, spec);
    EnsembleResult second = run_ensemble(pool_L, pool_P, spec);
    CHECK(first.per_trial == second.per_trial);

    double mean = 0.0;
    for (double v : first.per_trial) mean += v;
    mean /= static_cast<double>(first.per_trial.size());
    double var = 0.0;
    for (double v : first.per_trial) var += (v - mean) * (v - mean);
    var /= static_cast<double>(first.per_trial.size());
    CHECK(first.mean_accuracy == doctest::Approx(mean).epsilon(1e-15));
    CHECK(first.std_accuracy == doctest::Approx(std::sqrt(var)).epsilon(1e-15));

    EnsembleSpec other_seed = spec;
    other_seed.seed = 4321;
    EnsembleResult third = run_ensemble(pool_L, pool_P, other_seed);
    CHECK(third.per_trial != first.per_trial);
}

TEST_CASE("ensemble specs are validated") {
    auto pool = five_copies({0, 1});
    CHECK_THROWS_AS(run_ensemble(pool, pool, {2, 2, 10, 0}), Error);
    CHECK_THROWS_AS(run_ensemble(pool, pool, {3, 3, 10, 0}), Error);
    CHECK_THROWS_AS(run_ensemble(pool, pool, {-1, 6, 10, 0}), Error);
    CHECK_THROWS_AS(run_ensemble(pool, pool, {0, 5, 0, 0}), Error);

    std::vector<PredictionSet> short_pool(pool.begin(), pool.begin() + 3);
    CHECK_THROWS_AS(run_ensemble(short_pool, pool, {1, 4, 10, 0}), Error);
    // A short pool is fine while no draw touches it.
    CHECK_NOTHROW(run_ensemble(short_pool, pool, {0, 5, 2, 0}));
    CHECK_NOTHROW(run_ensemble({}, pool, {0, 5, 2, 0}));
}
