#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace credi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem and stream failures (missing files, unwritable paths, bad encodings).
class IoError : public Error {
public:
    using Error::Error;
};

class FileNotFound : public IoError {
public:
    explicit FileNotFound(const std::string& path)
        : IoError("file not found: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Input text is not valid UTF-8; `offset` is the first offending byte.
class EncodingError : public IoError {
public:
    EncodingError(const std::string& where, std::size_t offset)
        : IoError("malformed UTF-8 in " + where + " at byte " + std::to_string(offset)),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Anything that violates the data model: bad records, broken invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

class SchemaError : public ValidationError {
public:
    SchemaError(std::size_t line, std::string field, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line_(line), field_(std::move(field)) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class DanglingReference : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyDataset : public ValidationError {
public:
    EmptyDataset() : ValidationError("dataset has no instances") {}
    explicit EmptyDataset(const std::string& what) : ValidationError(what) {}
};

class MissingGold : public ValidationError {
public:
    explicit MissingGold(const std::string& instance_id)
        : ValidationError("instance '" + instance_id + "' has no gold labels"), id_(instance_id) {}
    const std::string& instance_id() const noexcept { return id_; }

private:
    std::string id_;
};

class AllClassesFiltered : public ValidationError {
public:
    AllClassesFiltered() : ValidationError("label balancing removed every class") {}
};

class CodeCollision : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnitMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : ValidationError("vector dimension " + std::to_string(got) + " does not match index dimension " +
                          std::to_string(expected)) {}
};

class LengthMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnknownLabel : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class MissingPrediction : public ValidationError {
public:
    explicit MissingPrediction(const std::string& instance_id)
        : ValidationError("no prediction record for instance '" + instance_id + "'") {}
};

class MissingPolarity : public ValidationError {
public:
    explicit MissingPolarity(const std::string& instance_id)
        : ValidationError("instance '" + instance_id + "' has no polarity label") {}
};

class ZeroInteractions : public ValidationError {
public:
    ZeroInteractions() : ValidationError("pair has no interactions") {}
};

/// Invalid configuration values or combinations.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure inside an embedder or inference backend.
class BackendFailure : public Error {
public:
    using Error::Error;
};

class EmbedderFailure : public BackendFailure {
public:
    EmbedderFailure(std::string instance_id, std::size_t completed, const std::string& cause)
        : BackendFailure("embedding failed for instance '" + instance_id + "' after " +
                         std::to_string(completed) + " completed: " + cause),
          id_(std::move(instance_id)), completed_(completed) {}
    const std::string& instance_id() const noexcept { return id_; }
    std::size_t completed() const noexcept { return completed_; }

private:
    std::string id_;
    std::size_t completed_;
};

} // namespace credi
