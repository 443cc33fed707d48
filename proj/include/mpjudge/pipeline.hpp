#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mpjudge/cache.hpp"
#include "mpjudge/config.hpp"
#include "mpjudge/stats.hpp"

namespace mpjudge {

/// Everything a run needs, loaded and validated once.
struct Session {
    RunConfig config;
    Benchmark benchmark;
    TemplateRegistry templates;
    std::shared_ptr<Backend> backend;  // cache-wrapped
    AnswerWords answer_words;
};

Session open_session(const RunConfig& config);

/// Status of one (method, template) prediction file.
struct RunEntry {
    std::string method_id;
    std::string template_id;  // empty for readout methods
    std::string file;         // relative to output_dir
    std::string status;       // "complete" | "partial"
    std::size_t n_predictions = 0;
    std::size_t n_failures = 0;
    std::string sha256;
};

struct RunSummary {
    std::string config_hash;
    BackendDescriptor backend;
    std::uint64_t seed = 0;
    std::vector<RunEntry> entries;
    std::size_t entries_skipped = 0;  // already complete per manifest

    bool partial() const;
};

/// Execute run_method for every (method, template) combination in the config,
/// write one prediction JSONL per combination plus manifest.json. Skips
/// combinations the manifest already records as complete (with a matching
/// file hash), so a rerun over a complete manifest is a no-op.
RunSummary cmd_run(const Session& session);

struct EnsembleReport {
    std::vector<EnsembleResult> results;
    double oracle_L = 0.0;  // max over in_lp templates
    double oracle_P = 0.0;  // max over yes_no templates
};

EnsembleReport cmd_ensemble(const Session& session);

/// Accuracy reports and diagnostics over the persisted prediction files.
/// Writes analysis.json plus TSV plot data under output_dir/plotdata/.
nlohmann::json cmd_analyze(const Session& session);

struct ValidationIssue {
    std::string check;
    bool ok = false;
    std::string detail;
};

std::vector<ValidationIssue> cmd_validate(const RunConfig& config);

/// Render analysis.json / ensemble.json into text tables.
std::string render_report(const nlohmann::json& analysis, const nlohmann::json* ensemble);

}  // namespace mpjudge
