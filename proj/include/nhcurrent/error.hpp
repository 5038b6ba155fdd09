#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace nhc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent inputs: shapes, Hermiticity, boundary support.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A configuration value failed validation; key() is the dotted path, e.g. "model.gamma.values".
class ConfigError : public InvalidInput {
public:
    ConfigError(std::string key, const std::string& what)
        : InvalidInput(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Requested operation is not defined for this lattice configuration.
class Unsupported : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// Solver breakdown: vanishing norm, ill-conditioned propagator, residual above tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace nhc
