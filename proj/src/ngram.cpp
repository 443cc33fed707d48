#include "mpjudge/ngram.hpp"

#include <cmath>

#include "mpjudge/digest.hpp"
#include "mpjudge/error.hpp"
#include "mpjudge/jsonio.hpp"

namespace mpjudge {

std::shared_ptr<NgramBackend> NgramBackend::train(const std::vector<std::string>& corpus,
                                                  const NgramParams& params) {
    if (params.order < 1) throw config_error("n-gram order must be >= 1");
    if (!(params.smoothing > 0.0)) throw config_error("n-gram smoothing must be > 0");

    auto model = std::shared_ptr<NgramBackend>(new NgramBackend());
    model->params_ = params;

    const std::size_t ctx_len = static_cast<std::size_t>(params.order - 1);
    std::string digest_body = "order=" + std::to_string(params.order) +
                              ";smoothing=" + fmt_double(params.smoothing);
    std::size_t trained_bytes = 0;
    for (const auto& text : corpus) {
        digest_body += '\x00';
        digest_body += text;
        for (std::size_t i = 0; i < text.size(); ++i) {
            std::size_t k = std::min(ctx_len, i);
            std::string context = text.substr(i - k, k);
            auto& row = model->counts_[context];
            ++row[static_cast<unsigned char>(text[i])];
            ++model->context_totals_[context];
            ++trained_bytes;
        }
    }
    if (trained_bytes == 0) throw config_error("n-gram training corpus is empty");

    model->descriptor_.backend_id = "ngram";
    model->descriptor_.model_id = "ngram-" + sha256_hex(digest_body).substr(0, 12);
    model->descriptor_.is_instruct = false;
    model->descriptor_.supports_chat = false;
    model->descriptor_.tokenizer_fingerprint = "byte-v1";
    return model;
}

double NgramBackend::logprob_at(std::string_view text, std::size_t pos) const {
    const std::size_t ctx_len = static_cast<std::size_t>(params_.order - 1);
    std::size_t k = std::min(ctx_len, pos);
    std::string_view context = text.substr(pos - k, k);

    std::uint32_t count = 0;
    std::uint64_t total = 0;
    if (auto it = counts_.find(context); it != counts_.end())
        count = it->second[static_cast<unsigned char>(text[pos])];
    if (auto it = context_totals_.find(context); it != context_totals_.end()) total = it->second;

    return std::log((count + params_.smoothing) /
                    (static_cast<double>(total) + params_.smoothing * 256.0));
}

ScoredText NgramBackend::score_text(const std::string& text) {
    if (text.empty()) throw backend_error("cannot score empty text");
    ScoredText scored;
    scored.text = text;
    scored.tokens.reserve(text.size());
    scored.token_logprobs.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        scored.tokens.emplace_back(1, text[i]);
        scored.token_logprobs.push_back(logprob_at(text, i));
    }
    return scored;
}

std::vector<ContinuationScore> NgramBackend::score_continuations(
    const std::string& prompt, const std::vector<std::string>& candidates) {
    if (candidates.empty()) throw backend_error("no candidates to score");
    std::vector<ContinuationScore> out;
    out.reserve(candidates.size());
    for (const auto& candidate : candidates) {
        if (candidate.empty()) throw backend_error("empty candidate");
        std::string full = prompt + candidate;
        ContinuationScore score;
        score.prompt = prompt;
        score.candidate = candidate;
        score.token_count = static_cast<int>(candidate.size());
        score.logprob = 0.0;
        for (std::size_t pos = prompt.size(); pos < full.size(); ++pos)
            score.logprob += logprob_at(full, pos);
        out.push_back(std::move(score));
    }
    return out;
}

std::array<double, 256> NgramBackend::next_logprobs(std::string_view context) const {
    const std::size_t ctx_len = static_cast<std::size_t>(params_.order - 1);
    if (context.size() > ctx_len) context = context.substr(context.size() - ctx_len);

    std::uint64_t total = 0;
    const std::array<std::uint32_t, 256>* row = nullptr;
    if (auto it = counts_.find(context); it != counts_.end()) row = &it->second;
    if (auto it = context_totals_.find(context); it != context_totals_.end()) total = it->second;

    std::array<double, 256> out{};
    double denom = static_cast<double>(total) + params_.smoothing * 256.0;
    for (int b = 0; b < 256; ++b) {
        double count = row ? (*row)[static_cast<std::size_t>(b)] : 0.0;
        out[static_cast<std::size_t>(b)] = std::log((count + params_.smoothing) / denom);
    }
    return out;
}

}  // namespace mpjudge
