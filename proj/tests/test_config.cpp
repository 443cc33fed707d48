#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <string>

#include "mpjudge/config.hpp"
#include "mpjudge/error.hpp"
#include "util.hpp"

using namespace mpjudge;
using mpjtest::TempDir;
using mpjtest::thrown_message;
using mpjtest::write_text;

namespace {

/// Minimal on-disk fixture a config can point at.
struct ConfigFixture {
    TempDir tmp;

    ConfigFixture() {
        write_text(tmp.path / "bench.jsonl",
                   "{\"sentence_good\": \"The dogs bark.\", \"sentence_bad\": \"The dogs "
                   "barks.\", \"UID\": \"u1\"}\n"
                   "{\"sentence_good\": \"He runs fast.\", \"sentence_bad\": \"He run fast.\", "
                   "\"UID\": \"u1\"}\n");
        write_text(tmp.path / "templates.json",
                   "[{\"template_id\": \"t1\", \"kind\": \"in_single\", \"body\": "
                   "\"Read: {sentence}\"}]");
        write_text(tmp.path / "corpus.txt", "the dogs bark at night\nhe runs fast\n");
    }

    nlohmann::json base_json() const {
        return nlohmann::json{
            {"seed", 7},
            {"benchmark", {{"path", "bench.jsonl"}}},
            {"templates", "templates.json"},
            {"backend", {{"type", "ngram"}, {"corpus", "corpus.txt"}, {"order", 2}}},
        };
    }

    RunConfig base_config() const { return config_from_json(base_json(), tmp.path); }
};

}  // namespace

TEST_CASE("the shipped example config loads and validates") {
    RunConfig config = load_config(mpjtest::data_dir() / "configs" / "mini_run.json");
    CHECK(config.name == "mini-en");
    CHECK(config.seed == 7);
    CHECK(config.seed_set);
    CHECK(config.benchmark.path == mpjtest::repo_dir() / "data" / "benchmarks" / "mini_en.jsonl");
    CHECK(config.benchmark.language == "en");
    CHECK(config.template_set_path ==
          mpjtest::repo_dir() / "data" / "templates" / "templates_en.json");
    CHECK(config.backend.type == "ngram");
    CHECK(config.backend.ngram.params.order == 3);
    CHECK(config.backend.ngram.params.smoothing == 0.5);
    CHECK(config.methods == method_ids());
    CHECK(config.output_dir == mpjtest::repo_dir() / "out" / "mini_en");
    CHECK(config.cache_dir == mpjtest::repo_dir() / "out" / "mini_en" / "cache");
    CHECK(config.concurrency == 2);
    CHECK(config.ensemble_trials == 20);
    CHECK(config.bootstrap.resamples == 1000);
    CHECK(config.analysis.length_bin_width == 2);
    CHECK(config.analysis.group_map_path ==
          mpjtest::repo_dir() / "data" / "groups" / "mini_groups.json");
    CHECK_NOTHROW(validate_config(config));
}

TEST_CASE("defaults fill everything the file leaves out") {
    ConfigFixture fx;
    RunConfig config = fx.base_config();
    CHECK(config.name == "run");
    CHECK(config.methods == method_ids());
    CHECK(config.concurrency == 1);
    CHECK(config.measure.alpha == 0.8);
    CHECK(config.answers.yes == "Yes");
    CHECK(config.answers.no == "No");
    CHECK_FALSE(config.answers.ab_leading_space);
    CHECK_FALSE(config.in_template_sentence_span);
    CHECK(config.ensemble_specs ==
          std::vector<std::pair<int, int>>{{0, 5}, {2, 3}, {3, 2}, {5, 0}});
    CHECK(config.ensemble_trials == 10);
    CHECK(config.bootstrap.resamples == 1000);
    CHECK(config.bootstrap.sample_size == 0);
    CHECK(config.analysis.length_bin_width == 1);
    CHECK(config.analysis.group_map_path.empty());
    CHECK(config.output_dir == (fx.tmp.path / "out"));
    CHECK(config.cache_dir == (fx.tmp.path / "out" / "cache"));
    CHECK_NOTHROW(validate_config(config));
}

TEST_CASE("schema keys remap benchmark fields") {
    ConfigFixture fx;
    auto j = fx.base_json();
    j["benchmark"]["schema"] = {{"sentence_good", "g"}, {"pair_id", "id"}};
    RunConfig config = config_from_json(j, fx.tmp.path);
    CHECK(config.benchmark.schema.sentence_good == "g");
    CHECK(config.benchmark.schema.sentence_bad == "sentence_bad");
    CHECK(config.benchmark.schema.pair_id == "id");
}

TEST_CASE("validation rejects inconsistent configs") {
    ConfigFixture fx;

    RunConfig no_seed = fx.base_config();
    no_seed.seed_set = false;
    const std::string msg = thrown_message([&] { validate_config(no_seed); });
    CHECK(msg.find("seed") != std::string::npos);

    RunConfig bad_method = fx.base_config();
    bad_method.methods = {"lp", "nonsense"};
    CHECK_THROWS_AS(validate_config(bad_method), Error);

    RunConfig no_methods = fx.base_config();
    no_methods.methods.clear();
    CHECK_THROWS_AS(validate_config(no_methods), Error);

    RunConfig missing_bench = fx.base_config();
    missing_bench.benchmark.path = fx.tmp.path / "nope.jsonl";
    CHECK_THROWS_AS(validate_config(missing_bench), Error);

    RunConfig missing_corpus = fx.base_config();
    missing_corpus.backend.ngram.corpus_path = fx.tmp.path / "nope.txt";
    CHECK_THROWS_AS(validate_config(missing_corpus), Error);

    RunConfig bad_conc = fx.base_config();
    bad_conc.concurrency = 0;
    CHECK_THROWS_AS(validate_config(bad_conc), Error);

    RunConfig bad_alpha = fx.base_config();
    bad_alpha.measure.alpha = -0.1;
    CHECK_THROWS_AS(validate_config(bad_alpha), Error);

    RunConfig bad_spec = fx.base_config();
    bad_spec.ensemble_specs = {{2, 2}};
    CHECK_THROWS_AS(validate_config(bad_spec), Error);

    RunConfig bad_trials = fx.base_config();
    bad_trials.ensemble_trials = 0;
    CHECK_THROWS_AS(validate_config(bad_trials), Error);

    RunConfig bad_resamples = fx.base_config();
    bad_resamples.bootstrap.resamples = 0;
    CHECK_THROWS_AS(validate_config(bad_resamples), Error);

    RunConfig bad_bin = fx.base_config();
    bad_bin.analysis.length_bin_width = 0;
    CHECK_THROWS_AS(validate_config(bad_bin), Error);

    RunConfig http_no_model = fx.base_config();
    http_no_model.backend.type = "http";
    CHECK_THROWS_AS(validate_config(http_no_model), Error);
}

TEST_CASE("config parsing errors name the problem") {
    ConfigFixture fx;

    auto no_bench = fx.base_json();
    no_bench.erase("benchmark");
    CHECK(thrown_message([&] { config_from_json(no_bench, fx.tmp.path); }).find("benchmark") !=
          std::string::npos);

    auto bad_backend = fx.base_json();
    bad_backend["backend"]["type"] = "quantum";
    CHECK_THROWS_AS(config_from_json(bad_backend, fx.tmp.path), Error);

    auto bad_seed = fx.base_json();
    bad_seed["seed"] = "seven";
    CHECK_THROWS_AS(config_from_json(bad_seed, fx.tmp.path), Error);

    auto bad_specs = fx.base_json();
    bad_specs["ensemble"] = {{"specs", {{1, 2, 3}}}};
    CHECK_THROWS_AS(config_from_json(bad_specs, fx.tmp.path), Error);

    write_text(fx.tmp.path / "broken.json", "{not json");
    CHECK_THROWS_AS(load_config(fx.tmp.path / "broken.json"), Error);
}

TEST_CASE("environment interpolation expands and fails loudly") {
    ConfigFixture fx;
    setenv("MPJ_TEST_VAR", "xyz", 1);

    auto j = fx.base_json();
    j["name"] = "pre-${MPJ_TEST_VAR}-post";
    RunConfig config = config_from_json(j, fx.tmp.path);
    CHECK(config.name == "pre-xyz-post");

    j["name"] = "${MPJ_TEST_VAR}${MPJ_TEST_VAR}";
    CHECK(config_from_json(j, fx.tmp.path).name == "xyzxyz");

    // Plain dollars pass through untouched.
    j["name"] = "costs $5 and $x";
    CHECK(config_from_json(j, fx.tmp.path).name == "costs $5 and $x");

    unsetenv("MPJ_TEST_VAR");
    j["name"] = "pre-${MPJ_TEST_VAR}-post";
    const std::string msg =
        thrown_message([&] { config_from_json(j, fx.tmp.path); });
    CHECK(msg.find("MPJ_TEST_VAR") != std::string::npos);
    CHECK(msg.find("not set") != std::string::npos);

    j["name"] = "broken-${MPJ_TEST";
    CHECK_THROWS_AS(config_from_json(j, fx.tmp.path), Error);
    j["name"] = "empty-${}";
    CHECK_THROWS_AS(config_from_json(j, fx.tmp.path), Error);

    // Values nested in objects and arrays interpolate too.
    setenv("MPJ_TEST_VAR", "bench.jsonl", 1);
    auto nested = fx.base_json();
    nested["benchmark"]["path"] = "${MPJ_TEST_VAR}";
    CHECK(config_from_json(nested, fx.tmp.path).benchmark.path == fx.tmp.path / "bench.jsonl");
    unsetenv("MPJ_TEST_VAR");
}

TEST_CASE("the run identity hash tracks semantics, not execution knobs") {
    ConfigFixture fx;
    RunConfig base = fx.base_config();
    const std::string h0 = config_hash(base);
    CHECK(h0.size() == 64);
    CHECK(config_hash(base) == h0);

    RunConfig moved = base;
    moved.output_dir = fx.tmp.path / "elsewhere";
    moved.cache_dir = fx.tmp.path / "elsewhere" / "c";
    moved.concurrency = 16;
    CHECK(config_hash(moved) == h0);

    RunConfig reseeded = base;
    reseeded.seed = 8;
    CHECK(config_hash(reseeded) != h0);

    RunConfig fewer_methods = base;
    fewer_methods.methods = {"lp"};
    CHECK(config_hash(fewer_methods) != h0);

    RunConfig other_alpha = base;
    other_alpha.measure.alpha = 1.0;
    CHECK(config_hash(other_alpha) != h0);

    RunConfig spaced = base;
    spaced.answers.ab_leading_space = true;
    CHECK(config_hash(spaced) != h0);

    RunConfig span = base;
    span.in_template_sentence_span = true;
    CHECK(config_hash(span) != h0);

    RunConfig smoothed = base;
    smoothed.backend.ngram.params.smoothing = 2.0;
    CHECK(config_hash(smoothed) != h0);

    // File content participates, not the file name.
    write_text(fx.tmp.path / "bench.jsonl",
               "{\"sentence_good\": \"New text here.\", \"sentence_bad\": \"New texts "
               "here.\", \"UID\": \"u1\"}\n");
    CHECK(config_hash(base) != h0);
}

TEST_CASE("http backend identity hashes the model, not the connection") {
    ConfigFixture fx;
    RunConfig base = fx.base_config();
    base.backend.type = "http";
    base.backend.http.model_id = "m1";
    base.backend.http.tokenizer_fingerprint = "tok1";
    const std::string h0 = config_hash(base);

    RunConfig reconnected = base;
    reconnected.backend.http.base_url = "http://other-host:9";
    reconnected.backend.http.api_key = "different";
    reconnected.backend.http.timeout_s = 99;
    reconnected.backend.http.retries = 7;
    CHECK(config_hash(reconnected) == h0);

    RunConfig other_model = base;
    other_model.backend.http.model_id = "m2";
    CHECK(config_hash(other_model) != h0);

    RunConfig other_mode = base;
    other_mode.backend.http.is_instruct = true;
    CHECK(config_hash(other_mode) != h0);

    RunConfig other_k = base;
    other_k.backend.http.top_logprobs = 5;
    CHECK(config_hash(other_k) != h0);
}
