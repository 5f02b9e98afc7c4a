#pragma once

#include <stdexcept>
#include <string>

namespace hopchain {

// Broad failure classes; the CLI maps each to an exit code and a category tag.
enum class ErrorKind {
    Parse,
    DuplicateId,
    Format,
    Dimension,
    Precondition,
    Divergence,
    SetMismatch,
    Config,
    Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(ErrorKind::Parse,
                source + ":" + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateIdError : public Error {
public:
    explicit DuplicateIdError(const std::string& id)
        : Error(ErrorKind::DuplicateId, "duplicate id \"" + id + "\""), id_(id) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class FormatError : public Error {
public:
    FormatError(const std::string& source, std::size_t line, const std::string& what)
        : Error(ErrorKind::Format,
                source + ":" + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DimensionError : public Error {
public:
    DimensionError(std::size_t expected, std::size_t got)
        : Error(ErrorKind::Dimension,
                "dimension mismatch: expected " + std::to_string(expected) +
                    ", got " + std::to_string(got)) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what)
        : Error(ErrorKind::Precondition, what) {}
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(int epoch)
        : Error(ErrorKind::Divergence,
                "training diverged: non-finite loss at epoch " + std::to_string(epoch)),
          epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class SetMismatchError : public Error {
public:
    explicit SetMismatchError(const std::string& what)
        : Error(ErrorKind::SetMismatch, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace hopchain
