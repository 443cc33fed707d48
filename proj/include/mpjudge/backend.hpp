#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace mpjudge {

/// A text with its tokenization and per-token conditional log-probabilities
/// (natural log). Token surfaces concatenate back to the exact text and all
/// logprobs are finite and <= 0.
struct ScoredText {
    std::string text;
    std::vector<std::string> tokens;
    std::vector<double> token_logprobs;

    std::size_t token_count() const { return tokens.size(); }
};

/// Throws backend_error if the ScoredText invariants do not hold.
void validate_scored_text(const ScoredText& scored);

/// Log-probability of a candidate continuation appearing right after a
/// prompt. Multi-token candidates are scored as the product over their
/// tokens; token_count records how many.
struct ContinuationScore {
    std::string prompt;
    std::string candidate;
    double logprob = 0.0;
    int token_count = 1;
};

struct BackendDescriptor {
    std::string backend_id;
    std::string model_id;
    bool is_instruct = false;
    bool supports_chat = false;
    std::string tokenizer_fingerprint;  // part of the cache key
};

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
};

/// Base-model prompt assembly: system + "\n" + user + "\nAnswer:".
std::string build_base_prompt(const std::string& system_message, const std::string& user_message);

/// Two-message chat payload (system, user); an empty system message yields a
/// single user message. Template application is the serving endpoint's job.
ChatRequest build_chat_request(const std::string& system_message, const std::string& user_message);

nlohmann::json chat_request_to_json(const ChatRequest& request);
ChatRequest chat_request_from_json(const nlohmann::json& j);

/// Uniform scoring interface over language models. Implementations must be
/// deterministic for a fixed model and safe to call from multiple threads.
class Backend {
public:
    virtual ~Backend() = default;

    virtual const BackendDescriptor& descriptor() const = 0;

    /// Per-token log-probabilities of `text` under the model.
    virtual ScoredText score_text(const std::string& text) = 0;

    /// Log-probability of each candidate immediately after `prompt`.
    virtual std::vector<ContinuationScore> score_continuations(
        const std::string& prompt, const std::vector<std::string>& candidates) = 0;

    /// Candidate scoring after a chat-templated prompt. Only meaningful when
    /// descriptor().supports_chat; the default implementation throws.
    virtual std::vector<ContinuationScore> score_chat_continuations(
        const ChatRequest& request, const std::vector<std::string>& candidates);
};

}  // namespace mpjudge
