#pragma once

#include <stdexcept>
#include <string>

namespace safedrive {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- trajectory ingestion ---

class MissingColumn : public Error {
public:
    explicit MissingColumn(std::string column)
        : Error("missing required column: " + column), column_(std::move(column)) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t line, const std::string& why)
        : Error("malformed row at line " + std::to_string(line) + ": " + why), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateKey : public Error {
public:
    DuplicateKey(long frame, long id)
        : Error("duplicate (frame, id) = (" + std::to_string(frame) + ", " + std::to_string(id) + ")") {}
};

// --- scene extraction / labeling ---

class UnknownEgo : public Error {
public:
    explicit UnknownEgo(long id) : Error("ego id " + std::to_string(id) + " not present at the requested frame") {}
};

class UnknownFrame : public Error {
public:
    explicit UnknownFrame(long frame) : Error("frame " + std::to_string(frame) + " not present in the table") {}
};

class TrackTooShort : public Error {
public:
    using Error::Error;
};

class BadParameter : public Error {
public:
    using Error::Error;
};

// --- risk assessor ---

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class ConventionMismatch : public Error {
public:
    using Error::Error;
};

// --- memory store ---

class EmptyText : public Error {
public:
    using Error::Error;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class CorruptStore : public Error {
public:
    using Error::Error;
};

class SchemaVersionMismatch : public Error {
public:
    using Error::Error;
};

// --- decision agent ---

// Raised when a model reply carries no decodable decision line. The raw
// reply is preserved so callers can log it; callers must treat this as
// no-decision rather than guessing an action.
class ParseError : public Error {
public:
    explicit ParseError(std::string raw)
        : Error("no decodable decision line in model output"), raw_(std::move(raw)) {}
    const std::string& raw() const { return raw_; }

private:
    std::string raw_;
};

// --- eval harness ---

class NonPositiveGap : public Error {
public:
    using Error::Error;
};

class EmptyLog : public Error {
public:
    using Error::Error;
};

class MissingLabels : public Error {
public:
    using Error::Error;
};

class InvalidState : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace safedrive
