#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "mpjudge/backend.hpp"

namespace mpjudge {

/// Content-addressed response store on disk. Keys are SHA-256 hex digests of
/// (backend identity, request kind, request body); values are opaque strings.
/// Writes go through a temp file plus rename, so concurrent idempotent puts
/// are safe and a put of an existing key is a no-op.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, std::string_view value);

    static std::string make_key(const BackendDescriptor& desc, std::string_view kind,
                                std::string_view body);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& key) const;
    std::filesystem::path dir_;
};

/// Backend wrapper that serves identical requests from the cache. Responses
/// are stored as JSON, so a warm cache issues zero calls to the inner
/// backend and reruns are bit-reproducible.
class CachedBackend : public Backend {
public:
    CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache);

    const BackendDescriptor& descriptor() const override;
    ScoredText score_text(const std::string& text) override;
    std::vector<ContinuationScore> score_continuations(
        const std::string& prompt, const std::vector<std::string>& candidates) override;
    std::vector<ContinuationScore> score_chat_continuations(
        const ChatRequest& request, const std::vector<std::string>& candidates) override;

    /// Calls that reached the inner backend (i.e. cache misses).
    std::size_t inner_calls() const { return inner_calls_; }

private:
    std::shared_ptr<Backend> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::atomic<std::size_t> inner_calls_{0};
};

nlohmann::json scored_text_to_json(const ScoredText& scored);
ScoredText scored_text_from_json(const nlohmann::json& j);
nlohmann::json continuation_scores_to_json(const std::vector<ContinuationScore>& scores);
std::vector<ContinuationScore> continuation_scores_from_json(const nlohmann::json& j);

}  // namespace mpjudge
