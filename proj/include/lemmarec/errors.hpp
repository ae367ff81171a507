#pragma once

#include <stdexcept>
#include <string>

namespace lemmarec {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad input data: malformed records, out-of-bounds boxes, empty labels, ...
// The CLI maps this to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Tensor shape mismatch. The message always carries both shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Bad configuration value (vocab size too small, degenerate range, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// NaN gradients, undefined means, and friends.
class NumericError : public Error {
public:
    using Error::Error;
};

// Checkpoint/tokenizer incompatibilities and malformed binary files.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace lemmarec
