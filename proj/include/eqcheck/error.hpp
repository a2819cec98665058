#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eqcheck {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is a byte offset into the source.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& message)
        : Error("parse error at offset " + std::to_string(offset) + ": " + message),
          offset_(offset), detail_(message) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t offset_;
    std::string detail_;
};

/// Evaluation left the domain of a partial function (log, sqrt, division, pow).
class DomainError : public Error {
public:
    DomainError(std::size_t offset, const std::string& message)
        : Error("domain error at offset " + std::to_string(offset) + ": " + message),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Manifold document does not conform to the schema. `path` names the field.
class SchemaError : public Error {
public:
    SchemaError(const std::string& path, const std::string& message)
        : Error(path.empty() ? message : path + ": " + message), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// A numerical precondition failed (singular metric, degenerate plane, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

/// A check was asked for something the spec cannot provide (unknown field, n too small, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration (unknown suite, missing soliton parameters, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace eqcheck
