#include "mpjudge/http_backend.hpp"

#include <cstdlib>
#include <stdexcept>

#include "httplib.h"
#include "mpjudge/error.hpp"

namespace mpjudge {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

int env_int_or(const char* name, int fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    try {
        return std::stoi(v);
    } catch (const std::exception&) {
        throw config_error(std::string(name) + " is not an integer: " + v);
    }
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

/// Echoed logprobs: a null leading entry means the unconditioned first token
/// and counts as 0.0; tiny positive values are server float fuzz and clamp
/// to 0.0.
double echo_logprob(const nlohmann::json& value) {
    if (value.is_null()) return 0.0;
    double lp = value.get<double>();
    if (lp > 0.0 && lp <= 1e-9) return 0.0;
    return lp;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.model_id.empty()) throw config_error("http backend needs a model_id");
    if (config_.base_url.empty()) config_.base_url = env_or("MPJ_API_BASE", "");
    if (config_.base_url.empty())
        throw config_error("http backend needs a base URL (config or MPJ_API_BASE)");
    if (config_.api_key.empty()) config_.api_key = env_or("MPJ_API_KEY", "");
    if (config_.timeout_s <= 0) config_.timeout_s = env_int_or("MPJ_TIMEOUT_S", 30);
    if (config_.retries < 0) config_.retries = env_int_or("MPJ_RETRIES", 2);
    if (config_.top_logprobs < 1) throw config_error("top_logprobs must be >= 1");
    if (config_.tokenizer_fingerprint.empty()) config_.tokenizer_fingerprint = config_.model_id;

    const std::string& url = config_.base_url;
    if (url.rfind("https://", 0) == 0)
        throw config_error("https endpoints are not supported; point at an http proxy");
    if (url.rfind("http://", 0) != 0)
        throw config_error("base URL must start with http://: " + url);
    std::string rest = url.substr(7);
    auto slash = rest.find('/');
    std::string authority = rest.substr(0, slash);
    path_prefix_ = slash == std::string::npos ? "" : rest.substr(slash);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    auto colon = authority.rfind(':');
    if (colon == std::string::npos) {
        host_ = authority;
        port_ = 80;
    } else {
        host_ = authority.substr(0, colon);
        try {
            port_ = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw config_error("bad port in base URL: " + url);
        }
    }
    if (host_.empty()) throw config_error("base URL has no host: " + url);

    descriptor_.backend_id = "http";
    descriptor_.model_id = config_.model_id;
    descriptor_.is_instruct = config_.is_instruct;
    descriptor_.supports_chat = config_.supports_chat;
    descriptor_.tokenizer_fingerprint = config_.tokenizer_fingerprint;
}

nlohmann::json HttpBackend::post_json(const std::string& path, const nlohmann::json& body) {
    // A fresh client per request keeps concurrent workers independent.
    std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        httplib::Client client(host_, port_);
        client.set_connection_timeout(config_.timeout_s, 0);
        client.set_read_timeout(config_.timeout_s, 0);
        client.set_write_timeout(config_.timeout_s, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);

        auto res = client.Post(path_prefix_ + path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
            if (retryable_status(res->status)) continue;
            throw backend_error(path + " failed: " + last_error);
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw backend_error(path + " returned malformed JSON: " + std::string(e.what()));
        }
    }
    throw backend_error(path + " failed after " + std::to_string(config_.retries + 1) +
                        " attempts: " + last_error);
}

ScoredText HttpBackend::echo_score(const std::string& text) {
    nlohmann::json body = {{"model", config_.model_id},
                           {"prompt", text},
                           {"max_tokens", 0},
                           {"echo", true},
                           {"logprobs", true}};
    auto response = post_json("/v1/completions", body);

    try {
        const auto& logprobs = response.at("choices").at(0).at("logprobs");
        ScoredText scored;
        scored.text = text;
        for (const auto& tok : logprobs.at("tokens")) scored.tokens.push_back(tok.get<std::string>());
        for (const auto& lp : logprobs.at("token_logprobs"))
            scored.token_logprobs.push_back(echo_logprob(lp));
        return scored;
    } catch (const nlohmann::json::exception& e) {
        throw backend_error("completions response missing echo logprobs: " +
                            std::string(e.what()));
    }
}

ScoredText HttpBackend::score_text(const std::string& text) {
    if (text.empty()) throw backend_error("cannot score empty text");
    auto scored = echo_score(text);
    validate_scored_text(scored);
    return scored;
}

std::vector<ContinuationScore> HttpBackend::score_continuations(
    const std::string& prompt, const std::vector<std::string>& candidates) {
    if (candidates.empty()) throw backend_error("no candidates to score");
    for (const auto& c : candidates)
        if (c.empty()) throw backend_error("empty candidate");

    nlohmann::json body = {{"model", config_.model_id},
                           {"prompt", prompt},
                           {"max_tokens", 1},
                           {"logprobs", config_.top_logprobs}};
    auto response = post_json("/v1/completions", body);

    nlohmann::json top;
    try {
        top = response.at("choices").at(0).at("logprobs").at("top_logprobs").at(0);
    } catch (const nlohmann::json::exception& e) {
        throw backend_error("completions response missing top_logprobs: " + std::string(e.what()));
    }

    std::vector<ContinuationScore> out;
    out.reserve(candidates.size());
    ScoredText prompt_scored;
    bool have_prompt_score = false;
    for (const auto& candidate : candidates) {
        ContinuationScore score;
        score.prompt = prompt;
        score.candidate = candidate;
        if (auto it = top.find(candidate); it != top.end()) {
            score.logprob = it->get<double>();
            score.token_count = 1;
        } else {
            // Not a single top-k token: score by echo difference.
            if (!have_prompt_score) {
                prompt_scored = echo_score(prompt);
                have_prompt_score = true;
            }
            auto full = echo_score(prompt + candidate);
            double diff = 0.0;
            for (double v : full.token_logprobs) diff += v;
            for (double v : prompt_scored.token_logprobs) diff -= v;
            score.logprob = std::min(diff, 0.0);
            long extra = static_cast<long>(full.token_count()) -
                         static_cast<long>(prompt_scored.token_count());
            score.token_count = static_cast<int>(std::max(extra, 1L));
        }
        out.push_back(std::move(score));
    }
    return out;
}

std::vector<ContinuationScore> HttpBackend::score_chat_continuations(
    const ChatRequest& request, const std::vector<std::string>& candidates) {
    if (!descriptor_.supports_chat)
        return Backend::score_chat_continuations(request, candidates);
    if (candidates.empty()) throw backend_error("no candidates to score");

    nlohmann::json body = chat_request_to_json(request);
    body["model"] = config_.model_id;
    body["max_tokens"] = 1;
    body["logprobs"] = true;
    body["top_logprobs"] = config_.top_logprobs;
    auto response = post_json("/v1/chat/completions", body);

    nlohmann::json top;
    try {
        top = response.at("choices").at(0).at("logprobs").at("content").at(0).at("top_logprobs");
    } catch (const nlohmann::json::exception& e) {
        throw backend_error("chat response missing top_logprobs: " + std::string(e.what()));
    }

    std::vector<ContinuationScore> out;
    out.reserve(candidates.size());
    std::string prompt_key = chat_request_to_json(request).dump();
    for (const auto& candidate : candidates) {
        ContinuationScore score;
        score.prompt = prompt_key;
        score.candidate = candidate;
        bool found = false;
        for (const auto& entry : top) {
            if (entry.at("token").get<std::string>() == candidate) {
                score.logprob = entry.at("logprob").get<double>();
                score.token_count = 1;
                found = true;
                break;
            }
        }
        if (!found)
            throw backend_error("candidate \"" + candidate +
                                "\" not in chat top-" + std::to_string(config_.top_logprobs) +
                                " logprobs; no echo fallback exists for chat endpoints");
        out.push_back(std::move(score));
    }
    return out;
}

}  // namespace mpjudge
