#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chaintag {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input record. line() is 1-based; 0 when not line oriented.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NotFound : public Error {
public:
    using Error::Error;
};

// Query / config validation failure. path() names the offending key, e.g. "where.input.address".
class ValidationError : public Error {
public:
    ValidationError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace chaintag
