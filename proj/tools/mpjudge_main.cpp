#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mpjudge/error.hpp"
#include "mpjudge/jsonio.hpp"
#include "mpjudge/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitPartial = 4;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<std::string> cache_dir;
    std::optional<int> concurrency;
    std::vector<std::string> methods;
    std::optional<double> alpha;
    std::optional<int> ensemble_trials;
    std::optional<int> resamples;
    std::optional<long> bin_width;
    bool sentence_span = false;
};

void add_common_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("-c,--config", ov.config_path, "Run config JSON file")->required();
    cmd->add_option("--seed", ov.seed, "Override the config seed");
    cmd->add_option("--output-dir", ov.output_dir, "Override the output directory");
    cmd->add_option("--cache-dir", ov.cache_dir, "Override the response cache directory");
    cmd->add_option("--concurrency", ov.concurrency, "Override worker count");
    cmd->add_option("--method", ov.methods, "Restrict to these methods (repeatable)");
    cmd->add_option("--alpha", ov.alpha, "Override the penalized-measure exponent");
    cmd->add_option("--ensemble-trials", ov.ensemble_trials, "Override ensemble trial count");
    cmd->add_option("--resamples", ov.resamples, "Override bootstrap resample count");
    cmd->add_option("--bin-width", ov.bin_width, "Override the length-diff bin width");
    cmd->add_flag("--sentence-span", ov.sentence_span,
                  "Apply in-template measures to the sentence span only");
}

mpjudge::RunConfig load_with_overrides(const Overrides& ov) {
    auto config = mpjudge::load_config(ov.config_path);
    if (ov.seed) {
        config.seed = *ov.seed;
        config.seed_set = true;
    }
    if (ov.output_dir) config.output_dir = *ov.output_dir;
    if (ov.cache_dir) config.cache_dir = *ov.cache_dir;
    if (ov.concurrency) config.concurrency = *ov.concurrency;
    if (!ov.methods.empty()) config.methods = ov.methods;
    if (ov.alpha) config.measure.alpha = *ov.alpha;
    if (ov.ensemble_trials) config.ensemble_trials = *ov.ensemble_trials;
    if (ov.resamples) config.bootstrap.resamples = *ov.resamples;
    if (ov.bin_width) config.analysis.length_bin_width = *ov.bin_width;
    if (ov.sentence_span) config.in_template_sentence_span = true;
    return config;
}

int run_validate(const Overrides& ov) {
    auto config = load_with_overrides(ov);
    auto issues = mpjudge::cmd_validate(config);
    bool all_ok = true;
    for (const auto& issue : issues) {
        std::printf("[%s] %s: %s\n", issue.ok ? "ok" : "FAIL", issue.check.c_str(),
                    issue.detail.c_str());
        all_ok = all_ok && issue.ok;
    }
    return all_ok ? kExitOk : kExitConfig;
}

int run_run(const Overrides& ov) {
    auto session = mpjudge::open_session(load_with_overrides(ov));
    auto summary = mpjudge::cmd_run(session);
    for (const auto& entry : summary.entries)
        std::printf("%-10s %-24s %s (%zu predictions, %zu failures)\n", entry.method_id.c_str(),
                    entry.template_id.empty() ? "-" : entry.template_id.c_str(),
                    entry.status.c_str(), entry.n_predictions, entry.n_failures);
    std::printf("config %s, %zu file(s) reused from a complete manifest\n",
                summary.config_hash.substr(0, 12).c_str(), summary.entries_skipped);
    return summary.partial() ? kExitPartial : kExitOk;
}

int run_ensemble(const Overrides& ov) {
    auto session = mpjudge::open_session(load_with_overrides(ov));
    auto report = mpjudge::cmd_ensemble(session);
    for (const auto& result : report.results)
        std::printf("%-8s mean %.4f std %.4f over %zu trials\n", result.label.c_str(),
                    result.mean_accuracy, result.std_accuracy, result.per_trial.size());
    std::printf("oracle in_lp %.4f, oracle yes_no %.4f\n", report.oracle_L, report.oracle_P);
    return kExitOk;
}

int run_analyze(const Overrides& ov) {
    auto session = mpjudge::open_session(load_with_overrides(ov));
    auto analysis = mpjudge::cmd_analyze(session);
    std::printf("wrote %s (%zu methods)\n",
                (session.config.output_dir / "analysis.json").string().c_str(),
                analysis.at("methods").size());
    return kExitOk;
}

int run_report(const Overrides& ov) {
    auto config = load_with_overrides(ov);
    auto analysis_path = config.output_dir / "analysis.json";
    if (!std::filesystem::exists(analysis_path))
        throw mpjudge::config_error("no analysis.json under " + config.output_dir.string() +
                                    "; run `mpjudge analyze` first");
    auto analysis = nlohmann::json::parse(mpjudge::read_file(analysis_path));
    nlohmann::json ensemble;
    bool have_ensemble = std::filesystem::exists(config.output_dir / "ensemble.json");
    if (have_ensemble)
        ensemble = nlohmann::json::parse(mpjudge::read_file(config.output_dir / "ensemble.json"));
    std::fputs(mpjudge::render_report(analysis, have_ensemble ? &ensemble : nullptr).c_str(),
               stdout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptability judgments over minimal pairs from token logprobs"};
    app.require_subcommand(1);

    Overrides ov;
    auto* validate = app.add_subcommand("validate", "Check config, data, templates and backend");
    auto* run = app.add_subcommand("run", "Score all (method, template) combinations");
    auto* ensemble = app.add_subcommand("ensemble", "Majority-vote ensembles over finished runs");
    auto* analyze = app.add_subcommand("analyze", "Accuracy reports and diagnostics");
    auto* report = app.add_subcommand("report", "Render analysis outputs as text tables");
    for (auto* cmd : {validate, run, ensemble, analyze, report}) add_common_options(cmd, ov);

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(validate)) return run_validate(ov);
        if (app.got_subcommand(run)) return run_run(ov);
        if (app.got_subcommand(ensemble)) return run_ensemble(ov);
        if (app.got_subcommand(analyze)) return run_analyze(ov);
        return run_report(ov);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const mpjudge::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        switch (e.kind()) {
            case mpjudge::ErrorKind::backend: return kExitBackend;
            case mpjudge::ErrorKind::config:
            case mpjudge::ErrorKind::io: return kExitConfig;
        }
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}
