#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace mpjudge {

/// One acceptable/unacceptable sentence pair with its paradigm and
/// phenomenon labels. The acceptable sentence is member 0 of the pair,
/// the unacceptable one member 1.
struct MinimalPair {
    std::string pair_id;
    std::string sentence_good;
    std::string sentence_bad;
    std::string paradigm_uid;
    std::string phenomenon;
    std::string field;     // e.g. "morphology"; empty when absent
    nlohmann::json extra;  // unmapped JSONL fields, preserved verbatim
};

struct Benchmark {
    std::string name;
    std::string language;  // ISO 639-1
    std::vector<MinimalPair> pairs;
    std::map<std::string, std::vector<std::size_t>> paradigm_index;     // uid -> pair indices
    std::map<std::string, std::vector<std::string>> phenomenon_index;   // phenomenon -> uids
};

/// Maps logical fields to the JSONL keys of a concrete benchmark file.
/// All mapped keys must be present on every line except `field` (optional
/// everywhere) and `pair_id` (empty mapping = ids synthesized from the line
/// number).
struct FieldMap {
    std::string sentence_good = "sentence_good";
    std::string sentence_bad = "sentence_bad";
    std::string paradigm = "UID";
    std::string phenomenon = "linguistics_term";
    std::string field = "field";
    std::string pair_id;
};

Benchmark load_benchmark(const std::filesystem::path& path, const FieldMap& schema = {},
                         const std::string& name = "", const std::string& language = "en");

/// Inverse of load_benchmark under the same schema (extra fields restored).
void save_benchmark(const Benchmark& bench, const std::filesystem::path& path,
                    const FieldMap& schema = {});

using WordSplitter = std::function<std::vector<std::string>(const std::string&)>;

/// Default word-splitting rule: split on whitespace, strip leading/trailing
/// punctuation from each token, ASCII-lowercase. Internal apostrophes and
/// hyphens survive.
std::vector<std::string> split_words(const std::string& sentence);

/// True iff the case-folded word multisets of the two sentences are equal
/// under the given splitting rule.
bool is_word_shuffling(const MinimalPair& pair, const WordSplitter& splitter = split_words);

/// Paradigm-level classification: a paradigm is word-shuffling iff every one
/// of its pairs is (strict conjunction).
std::map<std::string, bool> classify_paradigms(const Benchmark& bench,
                                               const WordSplitter& splitter = split_words);

/// Named grouping of paradigms (e.g. attractor types), read from config.
struct ParadigmGroupMap {
    std::string name;
    std::map<std::string, std::set<std::string>> groups;  // label -> paradigm uids
};

ParadigmGroupMap load_group_map(const std::filesystem::path& path);

}  // namespace mpjudge
