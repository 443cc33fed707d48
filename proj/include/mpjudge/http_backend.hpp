#pragma once

#include <string>
#include <vector>

#include "mpjudge/backend.hpp"

namespace mpjudge {

/// Connection settings for a completion-API-compatible endpoint. Fields left
/// empty/zero fall back to the MPJ_API_BASE, MPJ_API_KEY, MPJ_TIMEOUT_S and
/// MPJ_RETRIES environment variables.
struct HttpBackendConfig {
    std::string base_url;       // e.g. "http://127.0.0.1:8000"
    std::string api_key;
    std::string model_id;
    bool is_instruct = false;
    bool supports_chat = false;
    std::string tokenizer_fingerprint;  // defaults to model_id
    int timeout_s = 0;                  // 0 -> env or 30
    int retries = -1;                   // <0 -> env or 2
    int top_logprobs = 20;              // k requested for candidate lookup
};

/// Remote scoring over HTTP.
///
/// score_text uses POST /v1/completions with max_tokens=0, echo=true,
/// logprobs=true and reads the echoed per-token logprobs (a null first
/// logprob, which that API emits for the unconditioned first token, is taken
/// as 0.0). score_continuations asks for one generated token with top-k
/// logprobs and looks candidates up by exact surface; candidates missing from
/// the top-k (e.g. multi-token words) are scored via the echo difference
/// logprob(prompt+candidate) - logprob(prompt). Chat scoring reads the top-k
/// list of the first generated position of /v1/chat/completions.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    ScoredText score_text(const std::string& text) override;
    std::vector<ContinuationScore> score_continuations(
        const std::string& prompt, const std::vector<std::string>& candidates) override;
    std::vector<ContinuationScore> score_chat_continuations(
        const ChatRequest& request, const std::vector<std::string>& candidates) override;

    const HttpBackendConfig& config() const { return config_; }

private:
    nlohmann::json post_json(const std::string& path, const nlohmann::json& body);
    ScoredText echo_score(const std::string& text);

    HttpBackendConfig config_;
    BackendDescriptor descriptor_;
    std::string host_;
    int port_ = 80;
    std::string path_prefix_;
};

}  // namespace mpjudge
