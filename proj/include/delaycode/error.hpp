#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace delaycode {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes: ConfigError -> 1, DataError -> 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

// corpus
class UnknownLevel1 : public DataError {
public:
    using DataError::DataError;
};

class MalformedCode : public DataError {
public:
    using DataError::DataError;
};

class SchemaError : public DataError {
public:
    using DataError::DataError;
};

class CodeParseError : public DataError {
public:
    CodeParseError(std::size_t row, std::string value, const std::string& reason);

    std::size_t row() const noexcept { return row_; }
    const std::string& value() const noexcept { return value_; }

private:
    std::size_t row_;
    std::string value_;
};

class EmptyCorpus : public DataError {
public:
    using DataError::DataError;
};

// features
class EmptyVocabulary : public DataError {
public:
    using DataError::DataError;
};

// models / conformal
class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

class NonFinite : public DataError {
public:
    using DataError::DataError;
};

class UnknownLabel : public DataError {
public:
    using DataError::DataError;
};

class InsufficientData : public DataError {
public:
    using DataError::DataError;
};

// evaluation / stats
class LengthMismatch : public DataError {
public:
    using DataError::DataError;
};

class DegenerateData : public DataError {
public:
    using DataError::DataError;
};

class IncompleteBlock : public DataError {
public:
    using DataError::DataError;
};

// synth
class SpecError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

}  // namespace delaycode
