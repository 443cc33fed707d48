#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "mpjudge/error.hpp"
#include "mpjudge/jsonio.hpp"
#include "mpjudge/pipeline.hpp"

namespace py = pybind11;
using namespace mpjudge;

namespace {

Measure parse_measure(const std::string& name) {
    if (name == "lp") return Measure::lp;
    if (name == "mean_lp") return Measure::mean_lp;
    if (name == "pen_lp") return Measure::pen_lp;
    throw config_error("unknown measure \"" + name + "\" (expected lp, mean_lp or pen_lp)");
}

nlohmann::json pair_to_json(const MinimalPair& pair) {
    return {{"pair_id", pair.pair_id},
            {"sentence_good", pair.sentence_good},
            {"sentence_bad", pair.sentence_bad},
            {"paradigm", pair.paradigm_uid},
            {"phenomenon", pair.phenomenon},
            {"field", pair.field}};
}

Session session_for(const std::string& config_path) {
    return open_session(load_config(config_path));
}

std::string run_json(const std::string& config_path) {
    Session session = session_for(config_path);
    cmd_run(session);
    return read_file(session.config.output_dir / "manifest.json");
}

std::string ensemble_json(const std::string& config_path) {
    Session session = session_for(config_path);
    cmd_ensemble(session);
    return read_file(session.config.output_dir / "ensemble.json");
}

std::string analyze_json(const std::string& config_path) {
    Session session = session_for(config_path);
    return cmd_analyze(session).dump();
}

std::string report_text(const std::string& config_path) {
    RunConfig config = load_config(config_path);
    auto analysis = nlohmann::json::parse(read_file(config.output_dir / "analysis.json"));
    nlohmann::json ensemble;
    const bool have_ensemble = std::filesystem::exists(config.output_dir / "ensemble.json");
    if (have_ensemble)
        ensemble = nlohmann::json::parse(read_file(config.output_dir / "ensemble.json"));
    return render_report(analysis, have_ensemble ? &ensemble : nullptr);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "acceptability judgments over linguistic minimal pairs";

    py::class_<ScoredText>(m, "ScoredText")
        .def_readonly("text", &ScoredText::text)
        .def_readonly("tokens", &ScoredText::tokens)
        .def_readonly("token_logprobs", &ScoredText::token_logprobs)
        .def("__len__", &ScoredText::token_count);

    m.def("lp", &lp, py::arg("scored"), "Sum of token log-probabilities.");
    m.def(
        "mean_lp", [](const ScoredText& scored) { return mean_lp(scored); }, py::arg("scored"),
        "Per-token mean log-probability.");
    m.def(
        "pen_lp",
        [](const ScoredText& scored, double alpha) {
            return pen_lp(scored, MeasureParams{alpha});
        },
        py::arg("scored"), py::arg("alpha") = 0.8, "Length-penalized log-probability.");
    m.def("yes_no_prob", &yes_no_prob, py::arg("logprob_yes"), py::arg("logprob_no"),
          "Normalized yes-probability, stable for extreme gaps.");
    m.def("ab_good_is_a", &ab_good_is_a, py::arg("seed"), py::arg("pair_id"),
          py::arg("template_id"), "Deterministic per-pair coin for A/B slot assignment.");

    py::class_<NgramBackend, std::shared_ptr<NgramBackend>>(m, "NgramModel")
        .def(py::init([](const std::vector<std::string>& corpus, int order, double smoothing) {
                 return NgramBackend::train(corpus, NgramParams{order, smoothing});
             }),
             py::arg("corpus"), py::arg("order") = 2, py::arg("smoothing") = 1.0)
        .def_property_readonly(
            "model_id", [](const NgramBackend& b) { return b.descriptor().model_id; })
        .def("score_text", &NgramBackend::score_text, py::arg("text"))
        .def(
            "score_continuations",
            [](NgramBackend& b, const std::string& prompt,
               const std::vector<std::string>& candidates) {
                std::vector<std::tuple<std::string, double, long>> out;
                for (const auto& score : b.score_continuations(prompt, candidates))
                    out.emplace_back(score.candidate, score.logprob, score.token_count);
                return out;
            },
            py::arg("prompt"), py::arg("candidates"),
            "List of (candidate, logprob, token_count) in request order.");

    m.def(
        "load_benchmark_json",
        [](const std::string& path) {
            Benchmark bench = load_benchmark(path);
            nlohmann::json pairs = nlohmann::json::array();
            for (const auto& pair : bench.pairs) pairs.push_back(pair_to_json(pair));
            return pairs.dump();
        },
        py::arg("path"));

    m.def(
        "judge_readout_json",
        [](std::shared_ptr<NgramBackend> model, const std::string& sentence_good,
           const std::string& sentence_bad, const std::string& measure, double alpha) {
            MinimalPair pair;
            pair.pair_id = "interactive";
            pair.sentence_good = sentence_good;
            pair.sentence_bad = sentence_bad;
            return prediction_to_jsonl(
                judge_sentence_readout(pair, *model, parse_measure(measure),
                                       MeasureParams{alpha}));
        },
        py::arg("model"), py::arg("sentence_good"), py::arg("sentence_bad"),
        py::arg("measure") = "lp", py::arg("alpha") = 0.8);

    m.def(
        "validate",
        [](const std::string& config_path) {
            std::vector<std::tuple<std::string, bool, std::string>> out;
            for (const auto& issue : cmd_validate(load_config(config_path)))
                out.emplace_back(issue.check, issue.ok, issue.detail);
            return out;
        },
        py::arg("config_path"), "Per-stage (check, ok, detail) results for a config file.");

    m.def("run_json", &run_json, py::arg("config_path"),
          py::call_guard<py::gil_scoped_release>(),
          "Execute every configured (method, template) combination; returns the manifest.");
    m.def("ensemble_json", &ensemble_json, py::arg("config_path"),
          py::call_guard<py::gil_scoped_release>());
    m.def("analyze_json", &analyze_json, py::arg("config_path"),
          py::call_guard<py::gil_scoped_release>());
    m.def("report_text", &report_text, py::arg("config_path"));
}
