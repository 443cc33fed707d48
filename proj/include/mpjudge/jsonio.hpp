#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mpjudge {

/// Shortest round-trip decimal representation of a double (std::to_chars).
/// Every float written into persisted files goes through this so outputs are
/// byte-stable across platforms.
std::string fmt_double(double v);

/// JSON string literal (quotes and escapes included).
std::string json_quote(std::string_view s);

/// Whole-file read; throws io_error with the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Atomic whole-file write: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mpjudge
