#pragma once

#include <stdexcept>
#include <string>

namespace eegfc {

// Error categories map 1:1 onto the CLI exit codes (1 usage, 2 format, 3 numeric).
enum class ErrorKind { usage, format, numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_usage(const std::string& msg) { throw Error(ErrorKind::usage, msg); }
[[noreturn]] inline void fail_format(const std::string& msg) { throw Error(ErrorKind::format, msg); }
[[noreturn]] inline void fail_numeric(const std::string& msg) { throw Error(ErrorKind::numeric, msg); }

} // namespace eegfc
