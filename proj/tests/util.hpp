#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace mpjtest {

#ifdef MPJ_REPO_DIR
inline std::filesystem::path repo_dir() { return std::filesystem::path(MPJ_REPO_DIR); }
inline std::filesystem::path data_dir() { return repo_dir() / "data"; }
#endif

/// Unique scratch directory, removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::random_device rd;
        const std::uint64_t tag = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        path = std::filesystem::temp_directory_path() / ("mpjudge_test_" + std::to_string(tag));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

/// Runs `fn`, expecting it to throw; returns the exception message.
template <typename Fn>
std::string thrown_message(Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace mpjtest
