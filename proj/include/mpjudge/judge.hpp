#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpjudge/backend.hpp"
#include "mpjudge/benchmark.hpp"
#include "mpjudge/templates.hpp"

namespace mpjudge {

struct MeasureParams {
    double alpha = 0.8;  // length exponent of the penalized measure
};

enum class Measure { lp, mean_lp, pen_lp };

/// Sum of token log-probabilities: log P(s).
double lp(const ScoredText& scored);

/// log P(s) / |s|.
double mean_lp(const ScoredText& scored);

/// log P(s) / ((5 + |s|) / 6)^alpha.
double pen_lp(const ScoredText& scored, const MeasureParams& params = {});

double apply_measure(Measure measure, const ScoredText& scored, const MeasureParams& params);

/// Normalized "Yes" probability from two candidate log-probabilities,
/// exp(ly) / (exp(ly) + exp(ln)) evaluated in log space so magnitude-700
/// inputs neither underflow nor overflow.
double yes_no_prob(double logprob_yes, double logprob_no);

/// A method's verdict on one pair. Member 0 of a pair is the acceptable
/// sentence, so predicted_good_index == 0 means a correct prediction. Exact
/// score ties predict index 0 and set the tie flag. token_len_good/_bad are
/// the raw sentences' token counts under the judging backend (the length-bias
/// diagnostics run off them).
struct Prediction {
    std::string pair_id;
    std::string method_id;
    std::string template_id;  // empty for sentence readout
    double score_good = 0.0;
    double score_bad = 0.0;
    int predicted_good_index = 0;
    bool tie = false;
    bool correct = false;
    long token_len_good = 0;
    long token_len_bad = 0;
    nlohmann::json aux = nlohmann::json::object();
};

/// One JSON object per line, fixed field order, platform-stable float
/// formatting. This file format is the contract between the run, ensemble
/// and analyze stages.
std::string prediction_to_jsonl(const Prediction& pred);
Prediction prediction_from_jsonl(const std::string& line);
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

/// Candidate surfaces for the prompt methods. The A/B surfaces default to
/// exactly "A"/"B"; leading_space prepends " " to both. Yes/No words are
/// resolved per language before a run (see resolve_answer_words).
struct AnswerConfig {
    std::string yes = "Yes";
    std::string no = "No";
    std::string yes_zh = "是";
    std::string no_zh = "否";
    bool ab_leading_space = false;
};

struct AnswerWords {
    std::string yes = "Yes";
    std::string no = "No";
    bool fallback_applied = false;  // zh words were multi-token; using en words
};

/// Picks the language's answer words: for Chinese, uses 是/否 when the backend
/// tokenizes each as a single token, otherwise falls back to Yes/No.
AnswerWords resolve_answer_words(Backend& backend, const std::string& language,
                                 const AnswerConfig& config = {});

Prediction judge_sentence_readout(const MinimalPair& pair, Backend& backend, Measure measure,
                                  const MeasureParams& params = {});

/// In-template single readout. The measure is applied to the whole rendered
/// string; sentence_span_measure switches to the tokens covering the inserted
/// sentence only (the ablation variant).
Prediction judge_in_template(const MinimalPair& pair, Backend& backend, const Template& tmpl,
                             Measure measure, const MeasureParams& params = {},
                             bool sentence_span_measure = false);

/// In-template comparative readout, LP only: render good-first and bad-first,
/// predict the render with the higher whole-string LP.
Prediction judge_in_template_comparative(const MinimalPair& pair, Backend& backend,
                                         const Template& tmpl);

Prediction judge_ab(const MinimalPair& pair, Backend& backend, const Template& tmpl,
                    std::uint64_t seed, const AnswerConfig& config = {});

Prediction judge_yes_no(const MinimalPair& pair, Backend& backend, const Template& tmpl,
                        const AnswerWords& words);

/// The nine method ids, in the canonical reporting order.
const std::vector<std::string>& method_ids();
bool method_needs_template(const std::string& method_id);
TemplateKind method_template_kind(const std::string& method_id);  // valid when needed

struct RunOptions {
    std::uint64_t seed = 0;
    int concurrency = 1;
    MeasureParams measure;
    bool in_template_sentence_span = false;
    AnswerConfig answers;
    std::optional<AnswerWords> answer_words;  // resolved once if absent
};

struct PairFailure {
    std::string pair_id;
    std::string message;
};

struct MethodRun {
    std::string method_id;
    std::string template_id;
    std::vector<Prediction> predictions;  // benchmark order; failed pairs omitted
    std::vector<PairFailure> failures;

    bool partial() const { return !failures.empty(); }
};

/// Batch driver: one Prediction per pair in benchmark order, pair-level
/// parallelism bounded by options.concurrency, failures collected per pair.
/// `tmpl` must be supplied iff the method requires one.
MethodRun run_method(const Benchmark& bench, Backend& backend, const std::string& method_id,
                     const Template* tmpl, const RunOptions& options);

}  // namespace mpjudge
