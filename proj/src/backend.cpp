#include "mpjudge/backend.hpp"

#include <cmath>

#include "mpjudge/error.hpp"

namespace mpjudge {

void validate_scored_text(const ScoredText& scored) {
    if (scored.tokens.size() != scored.token_logprobs.size())
        throw backend_error("token/logprob length mismatch for text: " + scored.text);
    std::string joined;
    for (const auto& t : scored.tokens) joined += t;
    if (joined != scored.text)
        throw backend_error("token surfaces do not reconstruct text: " + scored.text);
    for (double lp : scored.token_logprobs) {
        if (!std::isfinite(lp) || lp > 0.0)
            throw backend_error("token logprob out of range for text: " + scored.text);
    }
}

std::string build_base_prompt(const std::string& system_message, const std::string& user_message) {
    return system_message + "\n" + user_message + "\nAnswer:";
}

ChatRequest build_chat_request(const std::string& system_message, const std::string& user_message) {
    ChatRequest request;
    if (!system_message.empty()) request.messages.push_back({"system", system_message});
    request.messages.push_back({"user", user_message});
    return request;
}

nlohmann::json chat_request_to_json(const ChatRequest& request) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : request.messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    return {{"messages", msgs}};
}

ChatRequest chat_request_from_json(const nlohmann::json& j) {
    ChatRequest request;
    for (const auto& m : j.at("messages"))
        request.messages.push_back({m.at("role").get<std::string>(),
                                    m.at("content").get<std::string>()});
    return request;
}

std::vector<ContinuationScore> Backend::score_chat_continuations(const ChatRequest&,
                                                                 const std::vector<std::string>&) {
    throw backend_error("backend " + descriptor().backend_id + " does not support chat scoring");
}

}  // namespace mpjudge
