#pragma once

#include <string>
#include <string_view>

namespace mpjudge {

/// Hex-encoded SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// First 8 bytes of SHA-256(data) as a big-endian uint64. Used where a
/// platform-stable hash of strings is needed (A/B coin, seed mixing).
std::uint64_t sha256_prefix64(std::string_view data);

}  // namespace mpjudge
