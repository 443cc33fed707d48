#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpjudge/benchmark.hpp"
#include "mpjudge/ensemble.hpp"
#include "mpjudge/http_backend.hpp"
#include "mpjudge/judge.hpp"
#include "mpjudge/ngram.hpp"

namespace mpjudge {

struct BenchmarkConfig {
    std::filesystem::path path;
    std::string name;
    std::string language = "en";
    FieldMap schema;
};

struct NgramBackendConfig {
    std::filesystem::path corpus_path;  // one training text per line
    NgramParams params;
};

struct BackendConfig {
    std::string type;  // "ngram" | "http"
    NgramBackendConfig ngram;
    HttpBackendConfig http;
};

struct BootstrapConfig {
    int resamples = 1000;
    std::size_t sample_size = 0;  // 0 = benchmark size
};

struct AnalysisConfig {
    long length_bin_width = 1;
    std::filesystem::path group_map_path;  // optional
};

struct RunConfig {
    std::string name;
    std::uint64_t seed = 0;
    bool seed_set = false;  // seed is mandatory; no implicit nondeterminism
    BenchmarkConfig benchmark;
    std::filesystem::path template_set_path;
    BackendConfig backend;
    std::vector<std::string> methods;
    std::filesystem::path cache_dir;
    std::filesystem::path output_dir;
    int concurrency = 1;
    MeasureParams measure;
    AnswerConfig answers;
    bool in_template_sentence_span = false;
    std::vector<std::pair<int, int>> ensemble_specs = {{0, 5}, {2, 3}, {3, 2}, {5, 0}};
    int ensemble_trials = 10;
    BootstrapConfig bootstrap;
    AnalysisConfig analysis;
};

/// Parse a config file. String values may interpolate environment variables
/// with ${NAME}; unset variables are an error (secrets must not silently
/// become empty strings).
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Hash over the semantically meaningful parts of the config: benchmark file
/// content and schema, template file content, backend identity, methods,
/// seed, measure and answer settings. Execution knobs (output/cache dirs,
/// concurrency) do not participate.
std::string config_hash(const RunConfig& config);

/// Throws config_error on missing paths, unknown methods or an unset seed.
void validate_config(const RunConfig& config);

}  // namespace mpjudge
