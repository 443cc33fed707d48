#include "mpjudge/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "mpjudge/error.hpp"
#include "mpjudge/jsonio.hpp"

namespace mpjudge {

double lp(const ScoredText& scored) {
    double sum = 0.0;
    for (double v : scored.token_logprobs) sum += v;
    return sum;
}

double mean_lp(const ScoredText& scored) {
    if (scored.token_count() == 0) throw backend_error("mean over zero tokens");
    return lp(scored) / static_cast<double>(scored.token_count());
}

double pen_lp(const ScoredText& scored, const MeasureParams& params) {
    if (scored.token_count() == 0) throw backend_error("penalty over zero tokens");
    double n = static_cast<double>(scored.token_count());
    return lp(scored) / std::pow((5.0 + n) / 6.0, params.alpha);
}

double apply_measure(Measure measure, const ScoredText& scored, const MeasureParams& params) {
    switch (measure) {
        case Measure::lp: return lp(scored);
        case Measure::mean_lp: return mean_lp(scored);
        case Measure::pen_lp: return pen_lp(scored, params);
    }
    throw config_error("unknown measure");
}

double yes_no_prob(double logprob_yes, double logprob_no) {
    // Logistic of the logprob difference; both branches keep exp() bounded.
    double d = logprob_yes - logprob_no;
    if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
    double e = std::exp(d);
    return e / (1.0 + e);
}

namespace {

void decide(Prediction& pred) {
    pred.tie = pred.score_good == pred.score_bad;
    pred.predicted_good_index = pred.score_good >= pred.score_bad ? 0 : 1;
    pred.correct = pred.predicted_good_index == 0;
}

std::string measure_name(Measure measure) {
    switch (measure) {
        case Measure::lp: return "lp";
        case Measure::mean_lp: return "mean_lp";
        case Measure::pen_lp: return "pen_lp";
    }
    throw config_error("unknown measure");
}

Measure measure_from_name(const std::string& name) {
    if (name == "lp") return Measure::lp;
    if (name == "mean_lp") return Measure::mean_lp;
    if (name == "pen_lp") return Measure::pen_lp;
    throw config_error("unknown measure \"" + name + "\"");
}

void record_raw_lengths(Prediction& pred, Backend& backend, const MinimalPair& pair) {
    pred.token_len_good = static_cast<long>(backend.score_text(pair.sentence_good).token_count());
    pred.token_len_bad = static_cast<long>(backend.score_text(pair.sentence_bad).token_count());
}

/// Tokens whose byte range intersects [span_begin, span_begin + span_len)
/// within the rendered string. Used by the sentence-span measure variant.
ScoredText sentence_span(const ScoredText& scored, std::size_t span_begin, std::size_t span_len) {
    ScoredText out;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < scored.tokens.size(); ++i) {
        std::size_t t0 = offset, t1 = offset + scored.tokens[i].size();
        offset = t1;
        if (t1 <= span_begin || t0 >= span_begin + span_len) continue;
        out.text += scored.tokens[i];
        out.tokens.push_back(scored.tokens[i]);
        out.token_logprobs.push_back(scored.token_logprobs[i]);
    }
    return out;
}

std::vector<ContinuationScore> score_prompt_candidates(Backend& backend,
                                                       const RenderedInput& rendered,
                                                       const std::vector<std::string>& candidates) {
    const auto& desc = backend.descriptor();
    if (desc.is_instruct && desc.supports_chat) {
        auto request = build_chat_request(rendered.system_message, rendered.text);
        return backend.score_chat_continuations(request, candidates);
    }
    auto prompt = build_base_prompt(rendered.system_message, rendered.text);
    return backend.score_continuations(prompt, candidates);
}

}  // namespace

Prediction judge_sentence_readout(const MinimalPair& pair, Backend& backend, Measure measure,
                                  const MeasureParams& params) {
    auto good = backend.score_text(pair.sentence_good);
    auto bad = backend.score_text(pair.sentence_bad);

    Prediction pred;
    pred.pair_id = pair.pair_id;
    pred.method_id = measure_name(measure);
    pred.score_good = apply_measure(measure, good, params);
    pred.score_bad = apply_measure(measure, bad, params);
    pred.token_len_good = static_cast<long>(good.token_count());
    pred.token_len_bad = static_cast<long>(bad.token_count());
    decide(pred);
    return pred;
}

Prediction judge_in_template(const MinimalPair& pair, Backend& backend, const Template& tmpl,
                             Measure measure, const MeasureParams& params,
                             bool sentence_span_measure) {
    auto rendered_good = render_single(tmpl, pair.sentence_good, pair.pair_id, 0);
    auto rendered_bad = render_single(tmpl, pair.sentence_bad, pair.pair_id, 1);
    auto scored_good = backend.score_text(rendered_good.text);
    auto scored_bad = backend.score_text(rendered_bad.text);

    Prediction pred;
    pred.pair_id = pair.pair_id;
    pred.method_id = "in_" + measure_name(measure);
    pred.template_id = tmpl.template_id;
    if (sentence_span_measure) {
        std::size_t slot = tmpl.body.find("{sentence}");
        pred.score_good = apply_measure(
            measure, sentence_span(scored_good, slot, pair.sentence_good.size()), params);
        pred.score_bad = apply_measure(
            measure, sentence_span(scored_bad, slot, pair.sentence_bad.size()), params);
        pred.aux["sentence_span"] = true;
    } else {
        pred.score_good = apply_measure(measure, scored_good, params);
        pred.score_bad = apply_measure(measure, scored_bad, params);
    }
    record_raw_lengths(pred, backend, pair);
    decide(pred);
    return pred;
}

Prediction judge_in_template_comparative(const MinimalPair& pair, Backend& backend,
                                         const Template& tmpl) {
    auto good_first = render_comparative(tmpl, pair.sentence_good, pair.sentence_bad,
                                         pair.pair_id, 0);
    auto bad_first = render_comparative(tmpl, pair.sentence_bad, pair.sentence_good,
                                        pair.pair_id, 1);

    Prediction pred;
    pred.pair_id = pair.pair_id;
    pred.method_id = "in_comp_lp";
    pred.template_id = tmpl.template_id;
    pred.score_good = lp(backend.score_text(good_first.text));
    pred.score_bad = lp(backend.score_text(bad_first.text));
    record_raw_lengths(pred, backend, pair);
    decide(pred);
    return pred;
}

Prediction judge_ab(const MinimalPair& pair, Backend& backend, const Template& tmpl,
                    std::uint64_t seed, const AnswerConfig& config) {
    auto rendered = render_ab(tmpl, pair, seed);
    std::string label_a = config.ab_leading_space ? " A" : "A";
    std::string label_b = config.ab_leading_space ? " B" : "B";
    auto scores = score_prompt_candidates(backend, rendered, {label_a, label_b});

    bool good_is_a = rendered.ab_good_label.value() == 'A';
    Prediction pred;
    pred.pair_id = pair.pair_id;
    pred.method_id = "ab";
    pred.template_id = tmpl.template_id;
    pred.score_good = good_is_a ? scores[0].logprob : scores[1].logprob;
    pred.score_bad = good_is_a ? scores[1].logprob : scores[0].logprob;
    record_raw_lengths(pred, backend, pair);
    decide(pred);

    // Raw label of the predicted sentence; on exact ties this is the
    // acceptable sentence's label, consistent with the index-0 tie rule.
    char predicted_label = pred.predicted_good_index == 0
                               ? rendered.ab_good_label.value()
                               : (good_is_a ? 'B' : 'A');
    pred.aux["choice"] = std::string(1, predicted_label);
    pred.aux["good_label"] = std::string(1, rendered.ab_good_label.value());
    pred.aux["logprob_a"] = scores[0].logprob;
    pred.aux["logprob_b"] = scores[1].logprob;
    return pred;
}

Prediction judge_yes_no(const MinimalPair& pair, Backend& backend, const Template& tmpl,
                        const AnswerWords& words) {
    auto prob_for = [&](const std::string& sentence, int index) {
        auto rendered = render_single(tmpl, sentence, pair.pair_id, index);
        auto scores = score_prompt_candidates(backend, rendered, {words.yes, words.no});
        return yes_no_prob(scores[0].logprob, scores[1].logprob);
    };

    Prediction pred;
    pred.pair_id = pair.pair_id;
    pred.method_id = "yes_no";
    pred.template_id = tmpl.template_id;
    pred.score_good = prob_for(pair.sentence_good, 0);
    pred.score_bad = prob_for(pair.sentence_bad, 1);
    record_raw_lengths(pred, backend, pair);
    decide(pred);
    pred.aux["answer_yes"] = words.yes;
    pred.aux["answer_no"] = words.no;
    if (words.fallback_applied) pred.aux["answer_fallback"] = true;
    return pred;
}

AnswerWords resolve_answer_words(Backend& backend, const std::string& language,
                                 const AnswerConfig& config) {
    AnswerWords words{config.yes, config.no, false};
    if (language != "zh") return words;
    bool single_yes = backend.score_text(config.yes_zh).token_count() == 1;
    bool single_no = backend.score_text(config.no_zh).token_count() == 1;
    if (single_yes && single_no) {
        words.yes = config.yes_zh;
        words.no = config.no_zh;
    } else {
        words.fallback_applied = true;
    }
    return words;
}

std::string prediction_to_jsonl(const Prediction& pred) {
    std::string line = "{\"pair_id\":" + json_quote(pred.pair_id);
    line += ",\"method_id\":" + json_quote(pred.method_id);
    line += ",\"template_id\":";
    line += pred.template_id.empty() ? "null" : json_quote(pred.template_id);
    line += ",\"score_good\":" + fmt_double(pred.score_good);
    line += ",\"score_bad\":" + fmt_double(pred.score_bad);
    line += ",\"predicted_good_index\":" + std::to_string(pred.predicted_good_index);
    line += ",\"tie\":";
    line += pred.tie ? "true" : "false";
    line += ",\"correct\":";
    line += pred.correct ? "true" : "false";
    line += ",\"token_len_good\":" + std::to_string(pred.token_len_good);
    line += ",\"token_len_bad\":" + std::to_string(pred.token_len_bad);
    line += ",\"aux\":" + pred.aux.dump();
    line += "}";
    return line;
}

Prediction prediction_from_jsonl(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error(std::string("malformed prediction line: ") + e.what());
    }
    Prediction pred;
    pred.pair_id = j.at("pair_id").get<std::string>();
    pred.method_id = j.at("method_id").get<std::string>();
    if (j.contains("template_id") && !j["template_id"].is_null())
        pred.template_id = j["template_id"].get<std::string>();
    pred.score_good = j.at("score_good").get<double>();
    pred.score_bad = j.at("score_bad").get<double>();
    pred.predicted_good_index = j.at("predicted_good_index").get<int>();
    pred.tie = j.at("tie").get<bool>();
    pred.correct = j.at("correct").get<bool>();
    pred.token_len_good = j.at("token_len_good").get<long>();
    pred.token_len_bad = j.at("token_len_bad").get<long>();
    pred.aux = j.value("aux", nlohmann::json::object());
    return pred;
}

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds) {
    std::string out;
    for (const auto& pred : preds) {
        out += prediction_to_jsonl(pred);
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<Prediction> preds;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        preds.push_back(prediction_from_jsonl(line));
    }
    return preds;
}

const std::vector<std::string>& method_ids() {
    static const std::vector<std::string> ids = {"lp",        "mean_lp", "pen_lp",
                                                 "in_lp",     "in_mean_lp", "in_pen_lp",
                                                 "in_comp_lp", "ab",      "yes_no"};
    return ids;
}

bool method_needs_template(const std::string& method_id) {
    return method_id.rfind("in_", 0) == 0 || method_id == "ab" || method_id == "yes_no";
}

TemplateKind method_template_kind(const std::string& method_id) {
    if (method_id == "in_lp" || method_id == "in_mean_lp" || method_id == "in_pen_lp")
        return TemplateKind::in_single;
    if (method_id == "in_comp_lp") return TemplateKind::in_comparative;
    if (method_id == "ab") return TemplateKind::ab_prompt;
    if (method_id == "yes_no") return TemplateKind::yesno_prompt;
    throw config_error("method \"" + method_id + "\" takes no template");
}

MethodRun run_method(const Benchmark& bench, Backend& backend, const std::string& method_id,
                     const Template* tmpl, const RunOptions& options) {
    const auto& ids = method_ids();
    if (std::find(ids.begin(), ids.end(), method_id) == ids.end())
        throw config_error("unknown method \"" + method_id + "\"");
    if (method_needs_template(method_id)) {
        if (!tmpl) throw config_error("method \"" + method_id + "\" needs a template");
        if (tmpl->kind != method_template_kind(method_id))
            throw config_error("method \"" + method_id + "\" cannot use template \"" +
                               tmpl->template_id + "\" of kind " + to_string(tmpl->kind));
    } else if (tmpl) {
        throw config_error("method \"" + method_id + "\" takes no template");
    }

    AnswerWords words;
    if (method_id == "yes_no")
        words = options.answer_words ? *options.answer_words
                                     : resolve_answer_words(backend, bench.language,
                                                            options.answers);

    auto judge_one = [&](const MinimalPair& pair) -> Prediction {
        if (method_id == "lp" || method_id == "mean_lp" || method_id == "pen_lp")
            return judge_sentence_readout(pair, backend, measure_from_name(method_id),
                                          options.measure);
        if (method_id == "in_lp" || method_id == "in_mean_lp" || method_id == "in_pen_lp")
            return judge_in_template(pair, backend, *tmpl, measure_from_name(method_id.substr(3)),
                                     options.measure, options.in_template_sentence_span);
        if (method_id == "in_comp_lp") return judge_in_template_comparative(pair, backend, *tmpl);
        if (method_id == "ab") return judge_ab(pair, backend, *tmpl, options.seed, options.answers);
        return judge_yes_no(pair, backend, *tmpl, words);
    };

    MethodRun run;
    run.method_id = method_id;
    run.template_id = tmpl ? tmpl->template_id : "";

    const std::size_t n = bench.pairs.size();
    std::vector<std::optional<Prediction>> slots(n);
    std::vector<std::string> errors(n);

    auto work = [&](std::size_t i) {
        try {
            slots[i] = judge_one(bench.pairs[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
            if (errors[i].empty()) errors[i] = "unknown error";
        }
    };

    int workers = std::max(1, options.concurrency);
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
        threads.reserve(count);
        for (std::size_t t = 0; t < count; ++t)
            threads.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) work(i);
            });
        for (auto& th : threads) th.join();
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i])
            run.predictions.push_back(std::move(*slots[i]));
        else
            run.failures.push_back({bench.pairs[i].pair_id, errors[i]});
    }
    return run;
}

}  // namespace mpjudge
