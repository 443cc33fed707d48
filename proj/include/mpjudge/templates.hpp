#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mpjudge {

struct MinimalPair;

enum class TemplateKind {
    in_single,       // readout: one {sentence} slot
    in_comparative,  // readout: {sentence_a} and {sentence_b}
    ab_prompt,       // prompt: {sentence_a}/{sentence_b}, answer A or B
    yesno_prompt,    // prompt: one {sentence} slot, answer Yes or No
};

std::string to_string(TemplateKind kind);
TemplateKind template_kind_from_string(const std::string& s);

/// A named, language-tagged pattern. Prompt kinds carry a system message;
/// readout kinds never do. Placeholder arity is validated at load time.
struct Template {
    std::string template_id;
    std::string language;  // ISO 639-1
    TemplateKind kind;
    std::string system_message;
    std::string body;
};

/// A concrete model input produced from a template. Readout kinds yield a
/// flat string to score; prompt kinds yield (system, user) messages that the
/// judge assembles per backend (base concatenation or chat payload).
struct RenderedInput {
    std::string template_id;
    std::string pair_id;
    int target_index = 0;  // which pair member is the judged sentence
    bool is_messages = false;
    std::string system_message;  // prompt kinds only
    std::string text;            // full string (readout) or user message (prompt)
    std::optional<char> ab_good_label;  // 'A' or 'B'; present iff kind == ab_prompt
};

/// Substitute {sentence} verbatim (no trimming, no re-casing).
RenderedInput render_single(const Template& tmpl, const std::string& sentence,
                            const std::string& pair_id = "", int target_index = 0);

/// Substitute {sentence_a} <- target, {sentence_b} <- other.
RenderedInput render_comparative(const Template& tmpl, const std::string& target,
                                 const std::string& other, const std::string& pair_id = "",
                                 int target_index = 0);

/// Render an A/B prompt with a seeded fair coin deciding whether the
/// acceptable sentence is labeled A. Deterministic in (seed, pair_id,
/// template_id) and identical on every platform.
RenderedInput render_ab(const Template& tmpl, const MinimalPair& pair, std::uint64_t seed);

/// The coin used by render_ab; true when the acceptable sentence is A.
bool ab_good_is_a(std::uint64_t seed, const std::string& pair_id, const std::string& template_id);

std::vector<Template> load_template_set(const std::filesystem::path& path);

/// Immutable registry grouped by (language, kind).
class TemplateRegistry {
public:
    explicit TemplateRegistry(std::vector<Template> templates);

    std::vector<const Template*> find(const std::string& language, TemplateKind kind) const;
    const Template* by_id(const std::string& template_id) const;  // nullptr if unknown
    const std::vector<Template>& all() const { return templates_; }

private:
    std::vector<Template> templates_;
};

/// Throws config_error (naming the template_id) on any invariant violation.
void validate_template(const Template& tmpl);

}  // namespace mpjudge
