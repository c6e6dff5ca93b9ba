#pragma once

#include <stdexcept>
#include <string>

namespace opdyn {

// Exit-status categories surfaced by the command line.
enum class ErrorCategory { Config = 2, Io = 3, Model = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

// Malformed input line; carries the 1-based line number.
class ParseError : public IoError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : IoError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class OpinionRangeError : public IoError {
public:
    using IoError::IoError;
};

class DanglingEdgeError : public IoError {
public:
    using IoError::IoError;
};

class ModelError : public Error {
public:
    explicit ModelError(const std::string& what) : Error(ErrorCategory::Model, what) {}
};

inline const char* category_name(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Model: return "model";
    }
    return "unknown";
}

} // namespace opdyn
