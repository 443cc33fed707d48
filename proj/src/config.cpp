#include "mpjudge/config.hpp"

#include <algorithm>
#include <cstdlib>

#include "mpjudge/digest.hpp"
#include "mpjudge/error.hpp"
#include "mpjudge/jsonio.hpp"

namespace mpjudge {

namespace {

bool env_name_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

std::string interpolate_env(const std::string& s) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '$' && i + 1 < s.size() && s[i + 1] == '{') {
            std::size_t end = i + 2;
            while (end < s.size() && env_name_char(s[end])) ++end;
            if (end >= s.size() || s[end] != '}')
                throw config_error("unterminated ${...} in config value: " + s);
            std::string name = s.substr(i + 2, end - (i + 2));
            if (name.empty()) throw config_error("empty ${} in config value: " + s);
            const char* value = std::getenv(name.c_str());
            if (!value)
                throw config_error("environment variable " + name + " is not set (used in config)");
            out += value;
            i = end + 1;
        } else {
            out.push_back(s[i]);
            ++i;
        }
    }
    return out;
}

void interpolate_tree(nlohmann::json& j) {
    if (j.is_string()) {
        j = interpolate_env(j.get<std::string>());
    } else if (j.is_object() || j.is_array()) {
        for (auto& child : j) interpolate_tree(child);
    }
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute() || base_dir.empty()) return path.lexically_normal();
    return (base_dir / path).lexically_normal();
}

const nlohmann::json& member(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw config_error(std::string("config is missing \"") + key + "\"");
    return *it;
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& input, const std::filesystem::path& base_dir) {
    if (!input.is_object()) throw config_error("config root must be a JSON object");
    nlohmann::json j = input;
    interpolate_tree(j);

    RunConfig config;
    config.name = j.value("name", "run");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer())
            throw config_error("seed must be an integer");
        config.seed = j["seed"].get<std::uint64_t>();
        config.seed_set = true;
    }

    const auto& bench = member(j, "benchmark");
    config.benchmark.path = resolve(base_dir, member(bench, "path").get<std::string>());
    config.benchmark.name = bench.value("name", "");
    config.benchmark.language = bench.value("language", "en");
    if (bench.contains("schema")) {
        const auto& schema = bench["schema"];
        config.benchmark.schema.sentence_good =
            schema.value("sentence_good", config.benchmark.schema.sentence_good);
        config.benchmark.schema.sentence_bad =
            schema.value("sentence_bad", config.benchmark.schema.sentence_bad);
        config.benchmark.schema.paradigm =
            schema.value("paradigm", config.benchmark.schema.paradigm);
        config.benchmark.schema.phenomenon =
            schema.value("phenomenon", config.benchmark.schema.phenomenon);
        config.benchmark.schema.field = schema.value("field", config.benchmark.schema.field);
        config.benchmark.schema.pair_id = schema.value("pair_id", "");
    }

    config.template_set_path = resolve(base_dir, member(j, "templates").get<std::string>());

    const auto& backend = member(j, "backend");
    config.backend.type = member(backend, "type").get<std::string>();
    if (config.backend.type == "ngram") {
        config.backend.ngram.corpus_path =
            resolve(base_dir, member(backend, "corpus").get<std::string>());
        config.backend.ngram.params.order = backend.value("order", 2);
        config.backend.ngram.params.smoothing = backend.value("smoothing", 1.0);
    } else if (config.backend.type == "http") {
        config.backend.http.base_url = backend.value("base_url", "");
        config.backend.http.api_key = backend.value("api_key", "");
        config.backend.http.model_id = member(backend, "model_id").get<std::string>();
        config.backend.http.is_instruct = backend.value("is_instruct", false);
        config.backend.http.supports_chat = backend.value("supports_chat", false);
        config.backend.http.tokenizer_fingerprint = backend.value("tokenizer_fingerprint", "");
        config.backend.http.timeout_s = backend.value("timeout_s", 0);
        config.backend.http.retries = backend.value("retries", -1);
        config.backend.http.top_logprobs = backend.value("top_logprobs", 20);
    } else {
        throw config_error("unknown backend type \"" + config.backend.type + "\"");
    }

    config.methods = j.value("methods", method_ids());
    if (j.contains("output_dir")) config.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    if (j.contains("cache_dir")) config.cache_dir = resolve(base_dir, j["cache_dir"].get<std::string>());
    config.concurrency = j.value("concurrency", 1);
    config.measure.alpha = j.value("alpha", 0.8);
    if (j.contains("answers")) {
        const auto& answers = j["answers"];
        config.answers.yes = answers.value("yes", config.answers.yes);
        config.answers.no = answers.value("no", config.answers.no);
        config.answers.yes_zh = answers.value("yes_zh", config.answers.yes_zh);
        config.answers.no_zh = answers.value("no_zh", config.answers.no_zh);
        config.answers.ab_leading_space =
            answers.value("ab_leading_space", config.answers.ab_leading_space);
    }
    config.in_template_sentence_span = j.value("in_template_sentence_span", false);
    if (j.contains("ensemble")) {
        const auto& ensemble = j["ensemble"];
        if (ensemble.contains("specs")) {
            config.ensemble_specs.clear();
            for (const auto& spec : ensemble["specs"]) {
                if (!spec.is_array() || spec.size() != 2)
                    throw config_error("ensemble specs must be [n_from_L, n_from_P] pairs");
                config.ensemble_specs.emplace_back(spec[0].get<int>(), spec[1].get<int>());
            }
        }
        config.ensemble_trials = ensemble.value("trials", 10);
    }
    if (j.contains("bootstrap")) {
        const auto& bootstrap = j["bootstrap"];
        config.bootstrap.resamples = bootstrap.value("resamples", 1000);
        config.bootstrap.sample_size = bootstrap.value("sample_size", std::size_t{0});
    }
    if (j.contains("analysis")) {
        const auto& analysis = j["analysis"];
        config.analysis.length_bin_width = analysis.value("length_bin_width", 1L);
        if (analysis.contains("group_map"))
            config.analysis.group_map_path =
                resolve(base_dir, analysis["group_map"].get<std::string>());
    }

    if (config.output_dir.empty()) config.output_dir = resolve(base_dir, "out");
    if (config.cache_dir.empty()) config.cache_dir = config.output_dir / "cache";
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(path.string() + ": malformed JSON: " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

void validate_config(const RunConfig& config) {
    if (!config.seed_set) throw config_error("config must set a seed (runs are deterministic)");
    if (!std::filesystem::exists(config.benchmark.path))
        throw config_error("benchmark file not found: " + config.benchmark.path.string());
    if (!std::filesystem::exists(config.template_set_path))
        throw config_error("template file not found: " + config.template_set_path.string());
    if (config.methods.empty()) throw config_error("no methods configured");
    const auto& known = method_ids();
    for (const auto& method : config.methods)
        if (std::find(known.begin(), known.end(), method) == known.end())
            throw config_error("unknown method \"" + method + "\"");
    if (config.concurrency < 1) throw config_error("concurrency must be >= 1");
    if (config.measure.alpha < 0.0) throw config_error("alpha must be >= 0");

    if (config.backend.type == "ngram") {
        if (!std::filesystem::exists(config.backend.ngram.corpus_path))
            throw config_error("corpus file not found: " +
                               config.backend.ngram.corpus_path.string());
        if (config.backend.ngram.params.order < 1) throw config_error("order must be >= 1");
        if (!(config.backend.ngram.params.smoothing > 0.0))
            throw config_error("smoothing must be > 0");
    } else if (config.backend.type == "http") {
        if (config.backend.http.model_id.empty())
            throw config_error("http backend needs a model_id");
    } else {
        throw config_error("unknown backend type \"" + config.backend.type + "\"");
    }

    for (const auto& [n_L, n_P] : config.ensemble_specs)
        if (n_L < 0 || n_P < 0 || n_L + n_P != 5)
            throw config_error("ensemble specs must draw exactly 5 sets");
    if (config.ensemble_trials < 1) throw config_error("ensemble trials must be >= 1");
    if (config.bootstrap.resamples < 1) throw config_error("bootstrap resamples must be >= 1");
    if (config.analysis.length_bin_width < 1) throw config_error("length_bin_width must be >= 1");
    if (!config.analysis.group_map_path.empty() &&
        !std::filesystem::exists(config.analysis.group_map_path))
        throw config_error("group map file not found: " + config.analysis.group_map_path.string());
}

std::string config_hash(const RunConfig& config) {
    nlohmann::json j;
    j["benchmark_content"] = sha256_hex(read_file(config.benchmark.path));
    j["benchmark_name"] = config.benchmark.name;
    j["benchmark_language"] = config.benchmark.language;
    j["schema"] = {{"sentence_good", config.benchmark.schema.sentence_good},
                   {"sentence_bad", config.benchmark.schema.sentence_bad},
                   {"paradigm", config.benchmark.schema.paradigm},
                   {"phenomenon", config.benchmark.schema.phenomenon},
                   {"field", config.benchmark.schema.field},
                   {"pair_id", config.benchmark.schema.pair_id}};
    j["templates_content"] = sha256_hex(read_file(config.template_set_path));
    if (config.backend.type == "ngram") {
        j["backend"] = {{"type", "ngram"},
                        {"corpus_content", sha256_hex(read_file(config.backend.ngram.corpus_path))},
                        {"order", config.backend.ngram.params.order},
                        {"smoothing", fmt_double(config.backend.ngram.params.smoothing)}};
    } else {
        j["backend"] = {{"type", "http"},
                        {"model_id", config.backend.http.model_id},
                        {"is_instruct", config.backend.http.is_instruct},
                        {"supports_chat", config.backend.http.supports_chat},
                        {"tokenizer_fingerprint", config.backend.http.tokenizer_fingerprint},
                        {"top_logprobs", config.backend.http.top_logprobs}};
    }
    j["methods"] = config.methods;
    j["seed"] = config.seed;
    j["alpha"] = fmt_double(config.measure.alpha);
    j["answers"] = {{"yes", config.answers.yes},
                    {"no", config.answers.no},
                    {"yes_zh", config.answers.yes_zh},
                    {"no_zh", config.answers.no_zh},
                    {"ab_leading_space", config.answers.ab_leading_space}};
    j["in_template_sentence_span"] = config.in_template_sentence_span;
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& [n_L, n_P] : config.ensemble_specs) specs.push_back({n_L, n_P});
    j["ensemble"] = {{"specs", specs}, {"trials", config.ensemble_trials}};
    j["bootstrap"] = {{"resamples", config.bootstrap.resamples},
                      {"sample_size", config.bootstrap.sample_size}};
    j["analysis_bin_width"] = config.analysis.length_bin_width;
    j["group_map_content"] = config.analysis.group_map_path.empty()
                                 ? ""
                                 : sha256_hex(read_file(config.analysis.group_map_path));
    return sha256_hex(j.dump());
}

}  // namespace mpjudge
