#pragma once

#include <stdexcept>
#include <string>

namespace mpjudge {

/// Broad failure classes; the CLI maps them to distinct exit codes.
enum class ErrorKind {
    config,   // bad config file, bad flags, invalid template/benchmark data
    backend,  // scoring backend unreachable or returned garbage
    io,       // filesystem failures (cache, outputs)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error config_error(const std::string& msg) { return Error(ErrorKind::config, msg); }
inline Error backend_error(const std::string& msg) { return Error(ErrorKind::backend, msg); }
inline Error io_error(const std::string& msg) { return Error(ErrorKind::io, msg); }

}  // namespace mpjudge
