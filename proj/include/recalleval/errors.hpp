#pragma once

#include <stdexcept>
#include <string>

namespace recalleval {

/// Base class for all recoverable errors raised by this library.
class RecallError : public std::runtime_error {
public:
    explicit RecallError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Transport or provider-side failure (after retries were exhausted).
class ProviderError : public RecallError {
public:
    using RecallError::RecallError;
};

/// A provider response did not match any recognized answer pattern.
class ParseError : public RecallError {
public:
    using RecallError::RecallError;
};

/// Replay-mode cache lookup missed; the run cannot proceed offline.
class CacheMissInReplay : public RecallError {
public:
    explicit CacheMissInReplay(const std::string& digest)
        : RecallError("cache miss in replay mode for digest " + digest), digest_(digest) {}
    const std::string& digest() const { return digest_; }

private:
    std::string digest_;
};

/// Malformed input data; carries the line number and field path when known.
class SchemaError : public RecallError {
public:
    SchemaError(const std::string& msg, std::size_t line, const std::string& field)
        : RecallError("line " + std::to_string(line) + ", field '" + field + "': " + msg),
          line_(line),
          field_(field) {}
    explicit SchemaError(const std::string& msg) : RecallError(msg), line_(0) {}
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_ = 0;
    std::string field_;
};

/// An answer produced no facts after normalization.
class EmptyAnswer : public RecallError {
public:
    using RecallError::RecallError;
};

/// Anchor-based metric applied to a fact without an anchor.
class MissingAnchor : public RecallError {
public:
    using RecallError::RecallError;
};

class DimMismatch : public RecallError {
public:
    using RecallError::RecallError;
};

class ZeroVector : public RecallError {
public:
    using RecallError::RecallError;
};

class UnequalRaterCounts : public RecallError {
public:
    using RecallError::RecallError;
};

class PairSetMismatch : public RecallError {
public:
    using RecallError::RecallError;
};

class IncompleteLabeling : public RecallError {
public:
    using RecallError::RecallError;
};

class InsufficientPopulation : public RecallError {
public:
    using RecallError::RecallError;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public RecallError {
public:
    using RecallError::RecallError;
};

}  // namespace recalleval
