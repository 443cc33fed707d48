#include "mpjudge/cache.hpp"

#include <system_error>

#include "mpjudge/digest.hpp"
#include "mpjudge/error.hpp"
#include "mpjudge/jsonio.hpp"

namespace mpjudge {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw io_error("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
    // Two-level fanout keeps directory listings small on large runs.
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    auto path = entry_path(key);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    return read_file(path);
}

void ResponseCache::put(const std::string& key, std::string_view value) {
    auto path = entry_path(key);
    // Keys are content addresses, so an existing entry is already this value.
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) return;
    write_file_atomic(path, value);
}

std::string ResponseCache::make_key(const BackendDescriptor& desc, std::string_view kind,
                                    std::string_view body) {
    std::string material;
    material.reserve(desc.backend_id.size() + desc.model_id.size() +
                     desc.tokenizer_fingerprint.size() + kind.size() + body.size() + 4);
    material += desc.backend_id;
    material += '\x1f';
    material += desc.model_id;
    material += '\x1f';
    material += desc.tokenizer_fingerprint;
    material += '\x1f';
    material += kind;
    material += '\x1f';
    material += body;
    return sha256_hex(material);
}

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

const BackendDescriptor& CachedBackend::descriptor() const { return inner_->descriptor(); }

ScoredText CachedBackend::score_text(const std::string& text) {
    auto key = ResponseCache::make_key(descriptor(), "score_text", text);
    if (auto hit = cache_->get(key)) return scored_text_from_json(nlohmann::json::parse(*hit));
    ++inner_calls_;
    auto scored = inner_->score_text(text);
    cache_->put(key, scored_text_to_json(scored).dump());
    return scored;
}

namespace {

std::string continuation_request_body(const nlohmann::json& prompt_part,
                                      const std::vector<std::string>& candidates) {
    nlohmann::json body = {{"prompt", prompt_part}, {"candidates", candidates}};
    return body.dump();
}

}  // namespace

std::vector<ContinuationScore> CachedBackend::score_continuations(
    const std::string& prompt, const std::vector<std::string>& candidates) {
    auto key = ResponseCache::make_key(descriptor(), "score_continuations",
                                       continuation_request_body(prompt, candidates));
    if (auto hit = cache_->get(key))
        return continuation_scores_from_json(nlohmann::json::parse(*hit));
    ++inner_calls_;
    auto scores = inner_->score_continuations(prompt, candidates);
    cache_->put(key, continuation_scores_to_json(scores).dump());
    return scores;
}

std::vector<ContinuationScore> CachedBackend::score_chat_continuations(
    const ChatRequest& request, const std::vector<std::string>& candidates) {
    auto key = ResponseCache::make_key(
        descriptor(), "score_chat_continuations",
        continuation_request_body(chat_request_to_json(request), candidates));
    if (auto hit = cache_->get(key))
        return continuation_scores_from_json(nlohmann::json::parse(*hit));
    ++inner_calls_;
    auto scores = inner_->score_chat_continuations(request, candidates);
    cache_->put(key, continuation_scores_to_json(scores).dump());
    return scores;
}

nlohmann::json scored_text_to_json(const ScoredText& scored) {
    return {{"text", scored.text}, {"tokens", scored.tokens},
            {"token_logprobs", scored.token_logprobs}};
}

ScoredText scored_text_from_json(const nlohmann::json& j) {
    ScoredText scored;
    scored.text = j.at("text").get<std::string>();
    scored.tokens = j.at("tokens").get<std::vector<std::string>>();
    scored.token_logprobs = j.at("token_logprobs").get<std::vector<double>>();
    return scored;
}

nlohmann::json continuation_scores_to_json(const std::vector<ContinuationScore>& scores) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : scores)
        arr.push_back({{"prompt", s.prompt},
                       {"candidate", s.candidate},
                       {"logprob", s.logprob},
                       {"token_count", s.token_count}});
    return arr;
}

std::vector<ContinuationScore> continuation_scores_from_json(const nlohmann::json& j) {
    std::vector<ContinuationScore> out;
    for (const auto& item : j) {
        ContinuationScore s;
        s.prompt = item.at("prompt").get<std::string>();
        s.candidate = item.at("candidate").get<std::string>();
        s.logprob = item.at("logprob").get<double>();
        s.token_count = item.at("token_count").get<int>();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace mpjudge
