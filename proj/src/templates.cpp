#include "mpjudge/templates.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "mpjudge/benchmark.hpp"
#include "mpjudge/digest.hpp"
#include "mpjudge/error.hpp"
#include "mpjudge/jsonio.hpp"

namespace mpjudge {

std::string to_string(TemplateKind kind) {
    switch (kind) {
        case TemplateKind::in_single: return "in_single";
        case TemplateKind::in_comparative: return "in_comparative";
        case TemplateKind::ab_prompt: return "ab_prompt";
        case TemplateKind::yesno_prompt: return "yesno_prompt";
    }
    throw config_error("unknown template kind");
}

TemplateKind template_kind_from_string(const std::string& s) {
    if (s == "in_single") return TemplateKind::in_single;
    if (s == "in_comparative") return TemplateKind::in_comparative;
    if (s == "ab_prompt") return TemplateKind::ab_prompt;
    if (s == "yesno_prompt") return TemplateKind::yesno_prompt;
    throw config_error("unknown template kind \"" + s + "\"");
}

namespace {

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

std::string substitute(std::string body, const std::string& placeholder,
                       const std::string& value) {
    auto pos = body.find(placeholder);
    body.replace(pos, placeholder.size(), value);
    return body;
}

bool is_prompt_kind(TemplateKind kind) {
    return kind == TemplateKind::ab_prompt || kind == TemplateKind::yesno_prompt;
}

}  // namespace

void validate_template(const Template& tmpl) {
    auto fail = [&](const std::string& why) {
        throw config_error("template \"" + tmpl.template_id + "\": " + why);
    };
    if (tmpl.template_id.empty()) throw config_error("template with empty template_id");
    for (char c : tmpl.template_id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_' || c == '.';
        // Ids name prediction files on disk, so they must be path-safe.
        if (!ok) fail("template_id must use only [A-Za-z0-9._-]");
    }
    if (tmpl.language.empty()) fail("empty language");
    if (tmpl.body.empty()) fail("empty body");

    std::size_t n_single = count_occurrences(tmpl.body, "{sentence}");
    std::size_t n_a = count_occurrences(tmpl.body, "{sentence_a}");
    std::size_t n_b = count_occurrences(tmpl.body, "{sentence_b}");

    switch (tmpl.kind) {
        case TemplateKind::in_single:
        case TemplateKind::yesno_prompt:
            if (n_single != 1) fail("needs exactly one {sentence}");
            if (n_a != 0 || n_b != 0) fail("must not contain {sentence_a}/{sentence_b}");
            break;
        case TemplateKind::in_comparative:
        case TemplateKind::ab_prompt:
            if (n_a != 1) fail("needs exactly one {sentence_a}");
            if (n_b != 1) fail("needs exactly one {sentence_b}");
            if (n_single != 0) fail("must not contain {sentence}");
            break;
    }
    if (!is_prompt_kind(tmpl.kind) && !tmpl.system_message.empty())
        fail("readout templates carry no system message");
}

RenderedInput render_single(const Template& tmpl, const std::string& sentence,
                            const std::string& pair_id, int target_index) {
    if (tmpl.kind != TemplateKind::in_single && tmpl.kind != TemplateKind::yesno_prompt)
        throw config_error("template \"" + tmpl.template_id + "\" is not a single-slot template");
    validate_template(tmpl);

    RenderedInput out;
    out.template_id = tmpl.template_id;
    out.pair_id = pair_id;
    out.target_index = target_index;
    out.is_messages = is_prompt_kind(tmpl.kind);
    out.system_message = out.is_messages ? tmpl.system_message : "";
    out.text = substitute(tmpl.body, "{sentence}", sentence);
    return out;
}

RenderedInput render_comparative(const Template& tmpl, const std::string& target,
                                 const std::string& other, const std::string& pair_id,
                                 int target_index) {
    if (tmpl.kind != TemplateKind::in_comparative)
        throw config_error("template \"" + tmpl.template_id + "\" is not a comparative template");
    validate_template(tmpl);

    RenderedInput out;
    out.template_id = tmpl.template_id;
    out.pair_id = pair_id;
    out.target_index = target_index;
    out.is_messages = false;
    out.text = substitute(substitute(tmpl.body, "{sentence_a}", target), "{sentence_b}", other);
    return out;
}

bool ab_good_is_a(std::uint64_t seed, const std::string& pair_id,
                  const std::string& template_id) {
    std::string material = std::to_string(seed);
    material += '\x1f';
    material += pair_id;
    material += '\x1f';
    material += template_id;
    // Top byte of the digest; & 1 is a fair coin over uniformly distributed
    // hash output, stable across platforms.
    return ((sha256_prefix64(material) >> 56) & 1) == 0;
}

RenderedInput render_ab(const Template& tmpl, const MinimalPair& pair, std::uint64_t seed) {
    if (tmpl.kind != TemplateKind::ab_prompt)
        throw config_error("template \"" + tmpl.template_id + "\" is not an A/B template");
    validate_template(tmpl);

    bool good_is_a = ab_good_is_a(seed, pair.pair_id, tmpl.template_id);
    const std::string& a = good_is_a ? pair.sentence_good : pair.sentence_bad;
    const std::string& b = good_is_a ? pair.sentence_bad : pair.sentence_good;

    RenderedInput out;
    out.template_id = tmpl.template_id;
    out.pair_id = pair.pair_id;
    out.target_index = 0;
    out.is_messages = true;
    out.system_message = tmpl.system_message;
    out.text = substitute(substitute(tmpl.body, "{sentence_a}", a), "{sentence_b}", b);
    out.ab_good_label = good_is_a ? 'A' : 'B';
    return out;
}

std::vector<Template> load_template_set(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(path.string() + ": malformed JSON: " + e.what());
    }
    const nlohmann::json* items = &j;
    if (j.is_object()) {
        if (!j.contains("templates"))
            throw config_error(path.string() + ": expected a \"templates\" array");
        items = &j["templates"];
    }
    if (!items->is_array()) throw config_error(path.string() + ": templates must be an array");

    std::vector<Template> templates;
    std::set<std::string> ids;
    for (const auto& item : *items) {
        Template tmpl;
        if (!item.is_object() || !item.contains("template_id") || !item.contains("kind") ||
            !item.contains("body"))
            throw config_error(path.string() + ": each template needs template_id, kind, body");
        tmpl.template_id = item.at("template_id").get<std::string>();
        tmpl.language = item.value("language", "en");
        tmpl.kind = template_kind_from_string(item.at("kind").get<std::string>());
        tmpl.system_message = item.value("system_message", "");
        tmpl.body = item.at("body").get<std::string>();
        validate_template(tmpl);
        if (!ids.insert(tmpl.template_id).second)
            throw config_error(path.string() + ": duplicate template_id \"" + tmpl.template_id +
                               "\"");
        templates.push_back(std::move(tmpl));
    }
    if (templates.empty()) throw config_error(path.string() + ": no templates");
    return templates;
}

TemplateRegistry::TemplateRegistry(std::vector<Template> templates)
    : templates_(std::move(templates)) {
    std::set<std::string> ids;
    for (const auto& tmpl : templates_) {
        validate_template(tmpl);
        if (!ids.insert(tmpl.template_id).second)
            throw config_error("duplicate template_id \"" + tmpl.template_id + "\"");
    }
}

std::vector<const Template*> TemplateRegistry::find(const std::string& language,
                                                    TemplateKind kind) const {
    std::vector<const Template*> out;
    for (const auto& tmpl : templates_)
        if (tmpl.language == language && tmpl.kind == kind) out.push_back(&tmpl);
    return out;
}

const Template* TemplateRegistry::by_id(const std::string& template_id) const {
    for (const auto& tmpl : templates_)
        if (tmpl.template_id == template_id) return &tmpl;
    return nullptr;
}

}  // namespace mpjudge
