#pragma once

#include <stdexcept>
#include <string>

namespace cfbench {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input that fails validation: bad config, bad parameters, precondition
// violations on graph operations. The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Malformed or invariant-violating dataset content (files or generator output).
class DatasetError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace cfbench
