#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mpjudge/backend.hpp"

namespace mpjudge {

struct NgramParams {
    int order = 2;           // context length is order-1 bytes
    double smoothing = 1.0;  // additive constant, > 0
};

/// Deterministic byte-level n-gram model with additive smoothing. Tokens are
/// single bytes, so any unicode text is scorable and token surfaces always
/// concatenate back to the input. Serves as the reference backend: exact
/// chain-rule products, no GPU, no network.
class NgramBackend : public Backend {
public:
    static std::shared_ptr<NgramBackend> train(const std::vector<std::string>& corpus,
                                               const NgramParams& params = {});

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    ScoredText score_text(const std::string& text) override;
    std::vector<ContinuationScore> score_continuations(
        const std::string& prompt, const std::vector<std::string>& candidates) override;

    /// Smoothed log P(byte | context) for all 256 next bytes. Exposed for the
    /// mock HTTP server and for brute-force checks in tests.
    std::array<double, 256> next_logprobs(std::string_view context) const;

    const NgramParams& params() const { return params_; }

private:
    NgramBackend() = default;

    // Context for position i is the previous min(order-1, i) bytes, so short
    // contexts occur only at text starts. Training and scoring use the same
    // extraction, which keeps every conditional a valid distribution.
    double logprob_at(std::string_view text, std::size_t pos) const;

    NgramParams params_;
    BackendDescriptor descriptor_;
    std::map<std::string, std::array<std::uint32_t, 256>, std::less<>> counts_;
    std::map<std::string, std::uint64_t, std::less<>> context_totals_;
};

}  // namespace mpjudge
