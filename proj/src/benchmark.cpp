#include "mpjudge/benchmark.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "mpjudge/error.hpp"
#include "mpjudge/jsonio.hpp"

namespace mpjudge {

namespace {

std::string trim_copy(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string at_line(const std::filesystem::path& path, std::size_t lineno, const std::string& msg) {
    return path.string() + ":" + std::to_string(lineno) + ": " + msg;
}

std::string require_string(const nlohmann::json& obj, const std::string& key,
                           const std::filesystem::path& path, std::size_t lineno) {
    auto it = obj.find(key);
    if (it == obj.end()) throw config_error(at_line(path, lineno, "missing field \"" + key + "\""));
    if (!it->is_string())
        throw config_error(at_line(path, lineno, "field \"" + key + "\" is not a string"));
    return it->get<std::string>();
}

std::string optional_string(const nlohmann::json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return "";
    return it->get<std::string>();
}

// ASCII-only classification so behavior is locale-independent. Bytes >= 0x80
// (multi-byte UTF-8) are never punctuation and never case-folded.
bool ascii_punct(char c) {
    auto u = static_cast<unsigned char>(c);
    return (u >= '!' && u <= '/') || (u >= ':' && u <= '@') || (u >= '[' && u <= '`') ||
           (u >= '{' && u <= '~');
}

}  // namespace

Benchmark load_benchmark(const std::filesystem::path& path, const FieldMap& schema,
                         const std::string& name, const std::string& language) {
    Benchmark bench;
    bench.name = name.empty() ? path.stem().string() : name;
    bench.language = language;

    std::istringstream in(read_file(path));
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen_ids;
    std::map<std::string, std::string> paradigm_phenomenon;

    while (std::getline(in, line)) {
        ++lineno;
        if (trim_copy(line).empty()) continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw config_error(at_line(path, lineno, std::string("malformed JSON: ") + e.what()));
        }
        if (!obj.is_object()) throw config_error(at_line(path, lineno, "line is not a JSON object"));

        MinimalPair pair;
        pair.sentence_good = require_string(obj, schema.sentence_good, path, lineno);
        pair.sentence_bad = require_string(obj, schema.sentence_bad, path, lineno);
        pair.paradigm_uid = optional_string(obj, schema.paradigm);
        pair.phenomenon = optional_string(obj, schema.phenomenon);
        pair.field = optional_string(obj, schema.field);
        pair.pair_id = schema.pair_id.empty() ? std::to_string(lineno)
                                              : require_string(obj, schema.pair_id, path, lineno);

        if (trim_copy(pair.sentence_good).empty() || trim_copy(pair.sentence_bad).empty())
            throw config_error(at_line(path, lineno, "empty sentence"));
        if (pair.sentence_good == pair.sentence_bad)
            throw config_error(at_line(path, lineno, "pair members are identical"));
        if (!seen_ids.insert(pair.pair_id).second)
            throw config_error(at_line(path, lineno, "duplicate pair_id \"" + pair.pair_id + "\""));

        auto [it, fresh] = paradigm_phenomenon.emplace(pair.paradigm_uid, pair.phenomenon);
        if (!fresh && it->second != pair.phenomenon)
            throw config_error(at_line(path, lineno,
                                       "paradigm \"" + pair.paradigm_uid +
                                           "\" appears under two phenomena (\"" + it->second +
                                           "\" and \"" + pair.phenomenon + "\")"));

        pair.extra = nlohmann::json::object();
        for (auto& [key, value] : obj.items()) {
            if (key == schema.sentence_good || key == schema.sentence_bad ||
                key == schema.paradigm || key == schema.phenomenon || key == schema.field ||
                (!schema.pair_id.empty() && key == schema.pair_id))
                continue;
            pair.extra[key] = value;
        }

        bench.paradigm_index[pair.paradigm_uid].push_back(bench.pairs.size());
        auto& uids = bench.phenomenon_index[pair.phenomenon];
        if (std::find(uids.begin(), uids.end(), pair.paradigm_uid) == uids.end())
            uids.push_back(pair.paradigm_uid);
        bench.pairs.push_back(std::move(pair));
    }

    if (bench.pairs.empty()) throw config_error(path.string() + ": no pairs");
    return bench;
}

void save_benchmark(const Benchmark& bench, const std::filesystem::path& path,
                    const FieldMap& schema) {
    std::string out;
    for (const auto& pair : bench.pairs) {
        nlohmann::json obj = pair.extra.is_object() ? pair.extra : nlohmann::json::object();
        obj[schema.sentence_good] = pair.sentence_good;
        obj[schema.sentence_bad] = pair.sentence_bad;
        if (!pair.paradigm_uid.empty()) obj[schema.paradigm] = pair.paradigm_uid;
        if (!pair.phenomenon.empty()) obj[schema.phenomenon] = pair.phenomenon;
        if (!pair.field.empty()) obj[schema.field] = pair.field;
        if (!schema.pair_id.empty()) obj[schema.pair_id] = pair.pair_id;
        out += obj.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::vector<std::string> split_words(const std::string& sentence) {
    std::vector<std::string> words;
    std::size_t i = 0;
    const std::size_t n = sentence.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(sentence[i]))) ++i;
        std::size_t j = i;
        while (j < n && !std::isspace(static_cast<unsigned char>(sentence[j]))) ++j;
        if (j > i) {
            std::size_t b = i, e = j;
            while (b < e && ascii_punct(sentence[b])) ++b;
            while (e > b && ascii_punct(sentence[e - 1])) --e;
            if (e > b) {
                std::string w = sentence.substr(b, e - b);
                for (char& c : w)
                    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                words.push_back(std::move(w));
            }
        }
        i = j;
    }
    return words;
}

bool is_word_shuffling(const MinimalPair& pair, const WordSplitter& splitter) {
    auto a = splitter(pair.sentence_good);
    auto b = splitter(pair.sentence_bad);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

std::map<std::string, bool> classify_paradigms(const Benchmark& bench,
                                               const WordSplitter& splitter) {
    std::map<std::string, bool> out;
    for (const auto& [uid, indices] : bench.paradigm_index) {
        bool all = true;
        for (std::size_t idx : indices) {
            if (!is_word_shuffling(bench.pairs[idx], splitter)) {
                all = false;
                break;
            }
        }
        out[uid] = all;
    }
    return out;
}

ParadigmGroupMap load_group_map(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(path.string() + ": malformed JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("groups") || !j["groups"].is_object())
        throw config_error(path.string() + ": expected {\"name\": ..., \"groups\": {label: [uid, ...]}}");

    ParadigmGroupMap map;
    map.name = j.value("name", path.stem().string());
    std::map<std::string, std::string> owner;
    for (auto& [label, uids] : j["groups"].items()) {
        if (!uids.is_array())
            throw config_error(path.string() + ": group \"" + label + "\" is not an array");
        auto& dest = map.groups[label];
        for (const auto& uid : uids) {
            if (!uid.is_string())
                throw config_error(path.string() + ": group \"" + label + "\" has a non-string uid");
            std::string u = uid.get<std::string>();
            auto [it, fresh] = owner.emplace(u, label);
            if (!fresh && it->second != label)
                throw config_error(path.string() + ": paradigm \"" + u +
                                   "\" appears in groups \"" + it->second + "\" and \"" + label +
                                   "\"");
            dest.insert(std::move(u));
        }
    }
    return map;
}

}  // namespace mpjudge
