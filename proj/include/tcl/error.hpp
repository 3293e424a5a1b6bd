#pragma once

#include <stdexcept>
#include <string>

namespace tcl {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Errors caused by bad user input (configs, flags, shapes named in a
/// config). The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class InvalidModeError : public ShapeError {
public:
    using ShapeError::ShapeError;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class DegenerateBatchError : public Error {
public:
    using Error::Error;
};

class LabelError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class UndefinedBaselineError : public Error {
public:
    using Error::Error;
};

}  // namespace tcl
