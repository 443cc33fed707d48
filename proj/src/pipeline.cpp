#include "mpjudge/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mpjudge/digest.hpp"
#include "mpjudge/error.hpp"
#include "mpjudge/jsonio.hpp"

namespace mpjudge {

namespace {

std::vector<std::string> read_corpus_lines(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

std::shared_ptr<Backend> make_inner_backend(const BackendConfig& config) {
    if (config.type == "ngram")
        return NgramBackend::train(read_corpus_lines(config.ngram.corpus_path),
                                   config.ngram.params);
    if (config.type == "http") return std::make_shared<HttpBackend>(config.http);
    throw config_error("unknown backend type \"" + config.type + "\"");
}

/// One (method, template) prediction file.
struct Combo {
    std::string method_id;
    const Template* tmpl = nullptr;  // null for readout methods

    std::string template_id() const { return tmpl ? tmpl->template_id : ""; }
    std::string file_name() const {
        return tmpl ? method_id + "__" + tmpl->template_id + ".jsonl" : method_id + ".jsonl";
    }
};

std::vector<Combo> enumerate_combos(const Session& session) {
    std::vector<Combo> combos;
    for (const auto& method : session.config.methods) {
        if (!method_needs_template(method)) {
            combos.push_back({method, nullptr});
            continue;
        }
        auto kind = method_template_kind(method);
        auto templates = session.templates.find(session.benchmark.language, kind);
        if (templates.empty())
            throw config_error("no " + to_string(kind) + " templates for language \"" +
                               session.benchmark.language + "\"");
        for (const Template* tmpl : templates) combos.push_back({method, tmpl});
    }
    return combos;
}

RunOptions run_options(const Session& session) {
    RunOptions options;
    options.seed = session.config.seed;
    options.concurrency = session.config.concurrency;
    options.measure = session.config.measure;
    options.in_template_sentence_span = session.config.in_template_sentence_span;
    options.answers = session.config.answers;
    options.answer_words = session.answer_words;
    return options;
}

nlohmann::json descriptor_to_json(const BackendDescriptor& desc) {
    return {{"backend_id", desc.backend_id},
            {"model_id", desc.model_id},
            {"is_instruct", desc.is_instruct},
            {"supports_chat", desc.supports_chat},
            {"tokenizer_fingerprint", desc.tokenizer_fingerprint}};
}

std::string predictions_file_digest(const std::filesystem::path& path) {
    return sha256_hex(read_file(path));
}

/// Complete entries of an existing manifest with the same config hash,
/// keyed by file name. Unreadable or stale manifests count as absent.
std::map<std::string, RunEntry> reusable_entries(const std::filesystem::path& manifest_path,
                                                 const std::string& config_hash,
                                                 const std::filesystem::path& output_dir) {
    std::map<std::string, RunEntry> reusable;
    std::error_code ec;
    if (!std::filesystem::exists(manifest_path, ec)) return reusable;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(manifest_path));
    } catch (const std::exception&) {
        return reusable;
    }
    if (!j.is_object() || j.value("config_hash", "") != config_hash) return reusable;
    if (!j.contains("entries") || !j["entries"].is_array()) return reusable;
    for (const auto& item : j["entries"]) {
        try {
            RunEntry entry;
            entry.method_id = item.at("method_id").get<std::string>();
            entry.template_id = item.value("template_id", "");
            entry.file = item.at("file").get<std::string>();
            entry.status = item.at("status").get<std::string>();
            entry.n_predictions = item.at("n_predictions").get<std::size_t>();
            entry.n_failures = item.at("n_failures").get<std::size_t>();
            entry.sha256 = item.at("sha256").get<std::string>();
            if (entry.status != "complete") continue;
            auto path = output_dir / entry.file;
            if (!std::filesystem::exists(path, ec)) continue;
            if (predictions_file_digest(path) != entry.sha256) continue;
            reusable[entry.file] = std::move(entry);
        } catch (const std::exception&) {
            continue;
        }
    }
    return reusable;
}

void write_manifest(const std::filesystem::path& path, const RunSummary& summary) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& entry : summary.entries)
        entries.push_back({{"method_id", entry.method_id},
                           {"template_id", entry.template_id},
                           {"file", entry.file},
                           {"status", entry.status},
                           {"n_predictions", entry.n_predictions},
                           {"n_failures", entry.n_failures},
                           {"sha256", entry.sha256}});
    nlohmann::json j = {{"config_hash", summary.config_hash},
                        {"backend", descriptor_to_json(summary.backend)},
                        {"seed", summary.seed},
                        {"entries", entries}};
    write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<Prediction> read_complete_run(const Session& session, const Combo& combo) {
    auto path = session.config.output_dir / combo.file_name();
    if (!std::filesystem::exists(path))
        throw config_error("prediction file missing (run first): " + path.string());
    auto preds = read_predictions(path);
    if (preds.size() != session.benchmark.pairs.size())
        throw config_error("prediction file " + path.string() + " covers " +
                           std::to_string(preds.size()) + " of " +
                           std::to_string(session.benchmark.pairs.size()) +
                           " pairs; re-run to complete it");
    return preds;
}

nlohmann::json optional_to_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

bool RunSummary::partial() const {
    for (const auto& entry : entries)
        if (entry.status != "complete") return true;
    return false;
}

Session open_session(const RunConfig& config) {
    validate_config(config);
    Benchmark bench = load_benchmark(config.benchmark.path, config.benchmark.schema,
                                     config.benchmark.name, config.benchmark.language);
    TemplateRegistry registry(load_template_set(config.template_set_path));
    auto cache = std::make_shared<ResponseCache>(config.cache_dir);
    auto backend = std::make_shared<CachedBackend>(make_inner_backend(config.backend), cache);
    AnswerWords words = resolve_answer_words(*backend, bench.language, config.answers);
    return Session{config, std::move(bench), std::move(registry), std::move(backend), words};
}

RunSummary cmd_run(const Session& session) {
    const auto& config = session.config;
    std::filesystem::create_directories(config.output_dir);

    RunSummary summary;
    summary.config_hash = config_hash(config);
    summary.backend = session.backend->descriptor();
    summary.seed = config.seed;

    auto manifest_path = config.output_dir / "manifest.json";
    auto reusable = reusable_entries(manifest_path, summary.config_hash, config.output_dir);
    auto options = run_options(session);

    for (const auto& combo : enumerate_combos(session)) {
        std::string file = combo.file_name();
        if (auto it = reusable.find(file); it != reusable.end()) {
            summary.entries.push_back(it->second);
            ++summary.entries_skipped;
            continue;
        }
        MethodRun run = run_method(session.benchmark, *session.backend, combo.method_id,
                                   combo.tmpl, options);
        auto path = config.output_dir / file;
        write_predictions(path, run.predictions);

        RunEntry entry;
        entry.method_id = combo.method_id;
        entry.template_id = combo.template_id();
        entry.file = file;
        entry.status = run.partial() ? "partial" : "complete";
        entry.n_predictions = run.predictions.size();
        entry.n_failures = run.failures.size();
        entry.sha256 = predictions_file_digest(path);
        summary.entries.push_back(std::move(entry));
    }

    write_manifest(manifest_path, summary);
    return summary;
}

EnsembleReport cmd_ensemble(const Session& session) {
    auto pool_for = [&](const std::string& method) {
        auto kind = method_template_kind(method);
        auto templates = session.templates.find(session.benchmark.language, kind);
        if (templates.size() != 5)
            throw config_error("ensembling needs exactly 5 " + to_string(kind) +
                               " templates for language \"" + session.benchmark.language +
                               "\", found " + std::to_string(templates.size()));
        std::vector<PredictionSet> pool;
        pool.reserve(5);
        for (const Template* tmpl : templates)
            pool.push_back(prediction_set_from(read_complete_run(session, {method, tmpl})));
        return pool;
    };

    auto pool_L = pool_for("in_lp");
    auto pool_P = pool_for("yes_no");

    EnsembleReport report;
    report.oracle_L = 0.0;
    report.oracle_P = 0.0;
    for (const auto& set : pool_L) report.oracle_L = std::max(report.oracle_L, set_accuracy(set));
    for (const auto& set : pool_P) report.oracle_P = std::max(report.oracle_P, set_accuracy(set));

    for (const auto& [n_L, n_P] : session.config.ensemble_specs) {
        EnsembleSpec spec;
        spec.n_from_L = n_L;
        spec.n_from_P = n_P;
        spec.trials = session.config.ensemble_trials;
        spec.seed = session.config.seed;
        report.results.push_back(run_ensemble(pool_L, pool_P, spec));
    }

    nlohmann::json results = nlohmann::json::array();
    for (const auto& result : report.results)
        results.push_back({{"label", result.label},
                           {"mean_accuracy", result.mean_accuracy},
                           {"std_accuracy", result.std_accuracy},
                           {"per_trial", result.per_trial}});
    nlohmann::json j = {{"results", results},
                        {"oracle_L", report.oracle_L},
                        {"oracle_P", report.oracle_P}};
    write_file_atomic(session.config.output_dir / "ensemble.json", j.dump(2) + "\n");
    return report;
}

nlohmann::json cmd_analyze(const Session& session) {
    const auto& config = session.config;
    const auto& bench = session.benchmark;

    std::optional<ParadigmGroupMap> groups;
    if (!config.analysis.group_map_path.empty())
        groups = load_group_map(config.analysis.group_map_path);

    // Method -> its runs (one per template; single run for readout methods).
    std::map<std::string, std::vector<std::vector<Prediction>>> runs_by_method;
    std::vector<std::string> method_order;
    for (const auto& combo : enumerate_combos(session)) {
        if (runs_by_method.find(combo.method_id) == runs_by_method.end())
            method_order.push_back(combo.method_id);
        runs_by_method[combo.method_id].push_back(read_complete_run(session, combo));
    }

    auto classification = classify_paradigms(bench);
    nlohmann::json analysis;
    analysis["config_hash"] = config_hash(config);
    analysis["backend"] = descriptor_to_json(session.backend->descriptor());
    analysis["benchmark"] = {{"name", bench.name},
                             {"language", bench.language},
                             {"n_pairs", bench.pairs.size()},
                             {"n_paradigms", bench.paradigm_index.size()}};

    std::filesystem::create_directories(config.output_dir / "plotdata");

    // Best (max accuracy) run per method feeds pairwise comparisons.
    std::map<std::string, const std::vector<Prediction>*> best_run;
    std::map<std::string, double> best_accuracy;

    nlohmann::json methods_json = nlohmann::json::object();
    for (const auto& method : method_order) {
        const auto& runs = runs_by_method[method];
        AccuracyReport report = accuracy(runs, bench, groups ? &*groups : nullptr);

        nlohmann::json m;
        m["overall"] = report.overall;
        m["n_pairs"] = report.n_pairs;
        m["n_correct"] = report.n_correct;
        m["n_templates"] = runs.size();
        m["mean_over_templates"] = report.mean_over_templates;
        m["std_over_templates"] = report.std_over_templates;
        m["max_over_templates"] = report.max_over_templates;
        m["by_template"] = report.by_template;
        m["by_paradigm"] = report.by_paradigm;
        m["by_phenomenon"] = report.by_phenomenon;
        if (groups) {
            nlohmann::json by_group = nlohmann::json::object();
            for (const auto& [label, acc] : report.by_group)
                by_group[label] = optional_to_json(acc);
            m["by_group"] = by_group;
            m["group_sizes"] = report.group_sizes;
        }

        std::vector<Prediction> pooled;
        for (const auto& run : runs) pooled.insert(pooled.end(), run.begin(), run.end());
        auto records = length_bias_records(pooled);
        auto bins = accuracy_by_length_diff(records, config.analysis.length_bin_width);
        m["length_bias"] = {{"point_biserial", optional_to_json(point_biserial(records))},
                            {"n_records", records.size()}};

        std::string tsv = "bin_lo\tbin_hi\tn\tn_success\taccuracy\twilson_lo\twilson_hi\n";
        for (const auto& bin : bins) {
            tsv += std::to_string(bin.lo) + "\t" + std::to_string(bin.hi) + "\t" +
                   std::to_string(bin.n) + "\t" + std::to_string(bin.n_success) + "\t" +
                   fmt_double(bin.accuracy) + "\t" + fmt_double(bin.wilson_lo) + "\t" +
                   fmt_double(bin.wilson_hi) + "\n";
        }
        write_file_atomic(config.output_dir / "plotdata" / ("length_accuracy_" + method + ".tsv"),
                          tsv);

        auto split = word_shuffling_split(pooled, bench, classification);
        m["word_shuffling"] = {{"shuffling", optional_to_json(split.shuffling)},
                               {"other", optional_to_json(split.other)},
                               {"n_shuffling", split.n_shuffling},
                               {"n_other", split.n_other}};

        if (method == "ab") m["a_proportion"] = a_proportion(runs);

        std::size_t best = 0;
        double best_acc = -1.0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            double acc = accuracy({runs[i]}, bench).overall;
            if (acc > best_acc) {
                best_acc = acc;
                best = i;
            }
        }
        best_run[method] = &runs_by_method[method][best];
        best_accuracy[method] = best_acc;

        methods_json[method] = std::move(m);
    }
    analysis["methods"] = methods_json;

    // Significance along the method ranking: each method's best-template run
    // against the next-ranked method's.
    std::vector<std::string> ranking = method_order;
    std::sort(ranking.begin(), ranking.end(), [&](const std::string& a, const std::string& b) {
        if (best_accuracy[a] != best_accuracy[b]) return best_accuracy[a] > best_accuracy[b];
        return a < b;
    });
    nlohmann::json bootstrap = nlohmann::json::array();
    for (std::size_t i = 0; i + 1 < ranking.size(); ++i) {
        double p = paired_bootstrap(*best_run[ranking[i]], *best_run[ranking[i + 1]],
                                    config.bootstrap.resamples, config.bootstrap.sample_size,
                                    config.seed);
        bootstrap.push_back({{"a", ranking[i]},
                             {"b", ranking[i + 1]},
                             {"accuracy_a", best_accuracy[ranking[i]]},
                             {"accuracy_b", best_accuracy[ranking[i + 1]]},
                             {"p_not_better", p}});
    }
    analysis["bootstrap"] = bootstrap;
    analysis["ranking"] = ranking;

    if (best_run.count("yes_no") && best_run.count("in_lp")) {
        auto scatter = accuracy_diff_vs_length_diff(*best_run["yes_no"], *best_run["in_lp"], bench);
        nlohmann::json points = nlohmann::json::array();
        std::string tsv = "paradigm\tmean_length_diff\taccuracy_diff\n";
        for (const auto& point : scatter.points) {
            points.push_back({{"paradigm", point.paradigm_uid},
                              {"mean_length_diff", point.mean_length_diff},
                              {"accuracy_diff", point.accuracy_diff}});
            tsv += point.paradigm_uid + "\t" + fmt_double(point.mean_length_diff) + "\t" +
                   fmt_double(point.accuracy_diff) + "\n";
        }
        analysis["scatter_yes_no_vs_in_lp"] = {{"points", points},
                                               {"pearson_r", optional_to_json(scatter.pearson_r)}};
        write_file_atomic(config.output_dir / "plotdata" / "scatter_yes_no_vs_in_lp.tsv", tsv);
    }

    write_file_atomic(config.output_dir / "analysis.json", analysis.dump(2) + "\n");
    return analysis;
}

std::vector<ValidationIssue> cmd_validate(const RunConfig& config) {
    std::vector<ValidationIssue> issues;
    auto check = [&](const std::string& name, auto&& fn) {
        ValidationIssue issue;
        issue.check = name;
        try {
            issue.detail = fn();
            issue.ok = true;
        } catch (const std::exception& e) {
            issue.ok = false;
            issue.detail = e.what();
        }
        issues.push_back(std::move(issue));
        return issues.back().ok;
    };

    if (!check("config", [&] {
            validate_config(config);
            return std::string("ok");
        }))
        return issues;

    Benchmark bench;
    bool bench_ok = check("benchmark", [&] {
        bench = load_benchmark(config.benchmark.path, config.benchmark.schema,
                               config.benchmark.name, config.benchmark.language);
        return std::to_string(bench.pairs.size()) + " pairs, " +
               std::to_string(bench.paradigm_index.size()) + " paradigms";
    });

    check("templates", [&] {
        TemplateRegistry registry(load_template_set(config.template_set_path));
        std::string language = bench_ok ? bench.language : config.benchmark.language;
        std::string detail;
        for (auto kind : {TemplateKind::in_single, TemplateKind::in_comparative,
                          TemplateKind::ab_prompt, TemplateKind::yesno_prompt}) {
            auto found = registry.find(language, kind);
            if (!detail.empty()) detail += ", ";
            detail += to_string(kind) + "=" + std::to_string(found.size());
        }
        for (const auto& method : config.methods) {
            if (!method_needs_template(method)) continue;
            if (registry.find(language, method_template_kind(method)).empty())
                throw config_error("no " + to_string(method_template_kind(method)) +
                                   " templates for language \"" + language + "\"");
        }
        return detail;
    });

    std::shared_ptr<Backend> backend;
    bool backend_ok = check("backend", [&] {
        backend = make_inner_backend(config.backend);
        auto scored = backend->score_text("Hello.");
        return backend->descriptor().model_id + " reachable, " +
               std::to_string(scored.token_count()) + " tokens for probe text";
    });

    if (backend_ok) {
        check("answer_words", [&] {
            auto words = resolve_answer_words(*backend, config.benchmark.language, config.answers);
            std::string detail = "yes=\"" + words.yes + "\" no=\"" + words.no + "\"";
            if (config.benchmark.language == "zh")
                detail += words.fallback_applied ? " (multi-token, fell back)" : " (single-token)";
            return detail;
        });
    }
    return issues;
}

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

std::string render_report(const nlohmann::json& analysis, const nlohmann::json* ensemble) {
    std::string out;
    const auto& bench = analysis.at("benchmark");
    out += "benchmark " + bench.at("name").get<std::string>() + " (" +
           bench.at("language").get<std::string>() + "), " +
           std::to_string(bench.at("n_pairs").get<std::size_t>()) + " pairs, " +
           std::to_string(bench.at("n_paradigms").get<std::size_t>()) + " paradigms\n";
    out += "backend " + analysis.at("backend").at("model_id").get<std::string>() + "\n";
    out += "config " + analysis.at("config_hash").get<std::string>().substr(0, 12) + "\n\n";

    out += pad("method", 12) + pad("mean", 8) + pad("std", 8) + pad("max", 8) +
           pad("templates", 10) + "\n";
    for (const auto& [method, m] : analysis.at("methods").items()) {
        out += pad(method, 12) + pad(fixed3(m.at("mean_over_templates").get<double>()), 8) +
               pad(fixed3(m.at("std_over_templates").get<double>()), 8) +
               pad(fixed3(m.at("max_over_templates").get<double>()), 8) +
               std::to_string(m.at("n_templates").get<std::size_t>()) + "\n";
    }

    out += "\n" + pad("method", 12) + pad("shuffling", 11) + pad("other", 8) +
           pad("len-biserial", 13) + "\n";
    for (const auto& [method, m] : analysis.at("methods").items()) {
        const auto& ws = m.at("word_shuffling");
        auto cell = [&](const nlohmann::json& v) {
            return v.is_null() ? std::string("-") : fixed3(v.get<double>());
        };
        out += pad(method, 12) + pad(cell(ws.at("shuffling")), 11) + pad(cell(ws.at("other")), 8) +
               pad(cell(m.at("length_bias").at("point_biserial")), 13);
        if (m.contains("a_proportion"))
            out += "A-rate " + fixed3(m.at("a_proportion").get<double>());
        out += "\n";
    }

    bool any_group = false;
    for (const auto& [method, m] : analysis.at("methods").items()) {
        if (!m.contains("by_group")) continue;
        if (!any_group) {
            out += "\ngroup accuracies\n";
            any_group = true;
        }
        out += pad(method, 12);
        for (const auto& [label, acc] : m.at("by_group").items())
            out += label + "=" + (acc.is_null() ? std::string("-") : fixed3(acc.get<double>())) +
                   " ";
        out += "\n";
    }

    if (analysis.contains("bootstrap") && !analysis.at("bootstrap").empty()) {
        out += "\nsignificance along ranking (p that the higher-ranked is not better)\n";
        for (const auto& cmp : analysis.at("bootstrap"))
            out += pad(cmp.at("a").get<std::string>() + " vs " + cmp.at("b").get<std::string>(),
                       26) +
                   "p=" + fixed3(cmp.at("p_not_better").get<double>()) + "\n";
    }

    if (analysis.contains("scatter_yes_no_vs_in_lp")) {
        const auto& r = analysis.at("scatter_yes_no_vs_in_lp").at("pearson_r");
        out += "\nper-paradigm (yes_no - in_lp) vs length diff: r=" +
               (r.is_null() ? std::string("undefined") : fixed3(r.get<double>())) + "\n";
    }

    if (ensemble) {
        out += "\n" + pad("ensemble", 12) + pad("mean", 8) + pad("std", 8) + "\n";
        for (const auto& result : ensemble->at("results"))
            out += pad(result.at("label").get<std::string>(), 12) +
                   pad(fixed3(result.at("mean_accuracy").get<double>()), 8) +
                   pad(fixed3(result.at("std_accuracy").get<double>()), 8) + "\n";
        out += "oracle in_lp " + fixed3(ensemble->at("oracle_L").get<double>()) + ", oracle yes_no " +
               fixed3(ensemble->at("oracle_P").get<double>()) + "\n";
    }
    return out;
}

}  // namespace mpjudge
