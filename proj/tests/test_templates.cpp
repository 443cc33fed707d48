#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <string>
#include <vector>

#include "mpjudge/benchmark.hpp"
#include "mpjudge/error.hpp"
#include "mpjudge/templates.hpp"
#include "util.hpp"

using namespace mpjudge;
using mpjtest::TempDir;
using mpjtest::thrown_message;
using mpjtest::write_text;

namespace {

Template make(const std::string& id, TemplateKind kind, const std::string& body,
              const std::string& system = "") {
    Template t;
    t.template_id = id;
    t.language = "en";
    t.kind = kind;
    t.system_message = system;
    t.body = body;
    return t;
}

}  // namespace

TEST_CASE("kind names round-trip") {
    for (auto kind : {TemplateKind::in_single, TemplateKind::in_comparative,
                      TemplateKind::ab_prompt, TemplateKind::yesno_prompt})
        CHECK(template_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(template_kind_from_string("bogus"), Error);
}

TEST_CASE("template validation enforces placeholder arity") {
    CHECK_NOTHROW(validate_template(make("t1", TemplateKind::in_single, "Read: {sentence}")));
    CHECK_NOTHROW(validate_template(
        make("t2", TemplateKind::in_comparative, "A: {sentence_a} B: {sentence_b}")));
    CHECK_NOTHROW(validate_template(
        make("t3", TemplateKind::ab_prompt, "A: {sentence_a} B: {sentence_b}", "sys")));
    CHECK_NOTHROW(validate_template(make("t4", TemplateKind::yesno_prompt, "{sentence}?", "sys")));

    CHECK_THROWS_AS(validate_template(make("", TemplateKind::in_single, "{sentence}")), Error);
    CHECK_THROWS_AS(validate_template(make("has space", TemplateKind::in_single, "{sentence}")),
                    Error);
    CHECK_THROWS_AS(validate_template(make("a/b", TemplateKind::in_single, "{sentence}")), Error);
    CHECK_THROWS_AS(validate_template(make("t", TemplateKind::in_single, "")), Error);
    CHECK_THROWS_AS(validate_template(make("t", TemplateKind::in_single, "no slot")), Error);
    CHECK_THROWS_AS(
        validate_template(make("t", TemplateKind::in_single, "{sentence} {sentence}")), Error);
    CHECK_THROWS_AS(
        validate_template(make("t", TemplateKind::in_single, "{sentence} {sentence_a}")), Error);
    CHECK_THROWS_AS(
        validate_template(make("t", TemplateKind::in_comparative, "only {sentence_a}")), Error);
    CHECK_THROWS_AS(
        validate_template(make("t", TemplateKind::in_comparative,
                               "{sentence_a} {sentence_b} {sentence_b}")),
        Error);
    CHECK_THROWS_AS(validate_template(make("t", TemplateKind::ab_prompt, "{sentence}", "sys")),
                    Error);

    // Readout strings are scored verbatim; a system message would be silent.
    const std::string msg = thrown_message([] {
        validate_template(make("t9", TemplateKind::in_single, "{sentence}", "sys"));
    });
    CHECK(msg.find("t9") != std::string::npos);

    Template missing_lang = make("t", TemplateKind::in_single, "{sentence}");
    missing_lang.language = "";
    CHECK_THROWS_AS(validate_template(missing_lang), Error);
}

TEST_CASE("single-slot rendering substitutes verbatim") {
    Template t = make("wrap", TemplateKind::in_single,
                      "The following sentence is grammatically acceptable.\n\n{sentence}");
    RenderedInput out = render_single(t, "The dogs bark.", "p1", 0);
    CHECK(out.text ==
          "The following sentence is grammatically acceptable.\n\nThe dogs bark.");
    CHECK(out.template_id == "wrap");
    CHECK(out.pair_id == "p1");
    CHECK(out.target_index == 0);
    CHECK_FALSE(out.is_messages);
    CHECK(out.system_message.empty());
    CHECK_FALSE(out.ab_good_label.has_value());

    Template q = make("ask", TemplateKind::yesno_prompt, "Acceptable?\n\n{sentence}", "Judge.");
    RenderedInput prompt = render_single(q, "He ran.", "p2", 1);
    CHECK(prompt.is_messages);
    CHECK(prompt.system_message == "Judge.");
    CHECK(prompt.text == "Acceptable?\n\nHe ran.");
    CHECK(prompt.target_index == 1);

    CHECK_THROWS_AS(render_single(make("c", TemplateKind::in_comparative,
                                       "{sentence_a} {sentence_b}"),
                                  "x", "p", 0),
                    Error);
}

TEST_CASE("comparative rendering puts the target in slot A") {
    Template t = make("cmp", TemplateKind::in_comparative, "A: {sentence_a}\nB:{sentence_b}");
    RenderedInput out = render_comparative(t, "Good one.", "Bad one.", "p1", 0);
    CHECK(out.text == "A: Good one.\nB:Bad one.");
    CHECK_FALSE(out.is_messages);

    RenderedInput flipped = render_comparative(t, "Bad one.", "Good one.", "p1", 1);
    CHECK(flipped.text == "A: Bad one.\nB:Good one.");
}

TEST_CASE("the A/B coin is deterministic, seed-sensitive and fair") {
    CHECK(ab_good_is_a(7, "p1", "t1") == ab_good_is_a(7, "p1", "t1"));

    // Some input must flip the coin under another seed or template; check a
    // few ids so the test does not bake in one hash value.
    bool seed_flips = false, template_flips = false;
    for (int i = 0; i < 64 && !(seed_flips && template_flips); ++i) {
        const std::string pid = "p" + std::to_string(i);
        seed_flips |= ab_good_is_a(7, pid, "t1") != ab_good_is_a(8, pid, "t1");
        template_flips |= ab_good_is_a(7, pid, "t1") != ab_good_is_a(7, pid, "t2");
    }
    CHECK(seed_flips);
    CHECK(template_flips);

    std::size_t heads = 0;
    const std::size_t n = 10000;
    for (std::size_t i = 0; i < n; ++i)
        if (ab_good_is_a(7, "pair" + std::to_string(i), "t1")) ++heads;
    const double frac = static_cast<double>(heads) / n;
    CHECK(frac > 0.48);
    CHECK(frac < 0.52);
}

TEST_CASE("A/B rendering labels the acceptable sentence by the coin") {
    Template t = make("ab1", TemplateKind::ab_prompt,
                      "Which is acceptable?\n\nA: {sentence_a}\nB: {sentence_b}", "Compare.");
    MinimalPair pair;
    pair.pair_id = "p42";
    pair.sentence_good = "GOODSENT";
    pair.sentence_bad = "BADSENT";

    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        RenderedInput out = render_ab(t, pair, seed);
        REQUIRE(out.ab_good_label.has_value());
        const bool coin = ab_good_is_a(seed, pair.pair_id, t.template_id);
        CHECK(*out.ab_good_label == (coin ? 'A' : 'B'));
        if (coin)
            CHECK(out.text == "Which is acceptable?\n\nA: GOODSENT\nB: BADSENT");
        else
            CHECK(out.text == "Which is acceptable?\n\nA: BADSENT\nB: GOODSENT");
        CHECK(out.is_messages);
        CHECK(out.system_message == "Compare.");
    }
}

TEST_CASE("shipped template sets load with five templates per kind") {
    for (const std::string stem : {"templates_en", "templates_zh"}) {
        CAPTURE(stem);
        auto templates =
            load_template_set(mpjtest::data_dir() / "templates" / (stem + ".json"));
        CHECK(templates.size() == 20);

        std::map<TemplateKind, int> per_kind;
        std::set<std::string> ids;
        for (const auto& t : templates) {
            CHECK_NOTHROW(validate_template(t));
            per_kind[t.kind]++;
            ids.insert(t.template_id);
        }
        CHECK(ids.size() == 20);
        CHECK(per_kind[TemplateKind::in_single] == 5);
        CHECK(per_kind[TemplateKind::in_comparative] == 5);
        CHECK(per_kind[TemplateKind::ab_prompt] == 5);
        CHECK(per_kind[TemplateKind::yesno_prompt] == 5);
    }

    auto en = load_template_set(mpjtest::data_dir() / "templates" / "templates_en.json");
    CHECK(en.front().template_id == "en_in_single_1");
    CHECK(en.front().body ==
          "The following sentence is grammatically acceptable.\n\n{sentence}");
    for (const auto& t : en) CHECK(t.language == "en");
}

TEST_CASE("template set files reject duplicates and bad entries") {
    TempDir tmp;
    write_text(tmp.path / "dup.json",
               "[{\"template_id\": \"x\", \"kind\": \"in_single\", \"body\": \"{sentence}\"},"
               " {\"template_id\": \"x\", \"kind\": \"in_single\", \"body\": \"{sentence}!\"}]");
    const std::string msg = thrown_message([&] { load_template_set(tmp.path / "dup.json"); });
    CHECK(msg.find("x") != std::string::npos);

    write_text(tmp.path / "empty.json", "[]");
    CHECK_THROWS_AS(load_template_set(tmp.path / "empty.json"), Error);

    // Both the bare-array and the wrapped form are accepted.
    write_text(tmp.path / "wrapped.json",
               "{\"templates\": [{\"template_id\": \"w1\", \"kind\": \"in_single\", "
               "\"body\": \"{sentence}\"}]}");
    auto wrapped = load_template_set(tmp.path / "wrapped.json");
    REQUIRE(wrapped.size() == 1);
    CHECK(wrapped[0].language == "en");  // default when omitted
}

TEST_CASE("registry groups by language and kind in file order") {
    std::vector<Template> templates = {
        make("en1", TemplateKind::in_single, "{sentence} one"),
        make("en2", TemplateKind::in_single, "{sentence} two"),
        make("ab1", TemplateKind::ab_prompt, "{sentence_a} {sentence_b}", "s"),
    };
    Template zh = make("zh1", TemplateKind::in_single, "{sentence} 三");
    zh.language = "zh";
    templates.push_back(zh);

    TemplateRegistry registry(templates);
    auto en_singles = registry.find("en", TemplateKind::in_single);
    REQUIRE(en_singles.size() == 2);
    CHECK(en_singles[0]->template_id == "en1");
    CHECK(en_singles[1]->template_id == "en2");
    CHECK(registry.find("zh", TemplateKind::in_single).size() == 1);
    CHECK(registry.find("en", TemplateKind::yesno_prompt).empty());

    REQUIRE(registry.by_id("ab1") != nullptr);
    CHECK(registry.by_id("ab1")->kind == TemplateKind::ab_prompt);
    CHECK(registry.by_id("nope") == nullptr);

    templates.push_back(templates.front());
    CHECK_THROWS_AS(TemplateRegistry{templates}, Error);
}
