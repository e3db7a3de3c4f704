#pragma once

#include <stdexcept>
#include <string>

namespace demuxsr {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration file or unknown config keys (CLI exit code 2).
class config_error : public error {
public:
    using error::error;
};

/// Violated precondition, out-of-model parameter, or numerical failure
/// (CLI exit code 3).
class model_error : public error {
public:
    using error::error;
};

/// Quadrature or finite-difference accuracy could not be reached.
class accuracy_error : public model_error {
public:
    using model_error::model_error;
};

/// SLD equation has no solution on the kernel of the state.
class singular_model_error : public model_error {
public:
    using model_error::model_error;
};

/// Degenerate design matrix or non-converging fit.
class fit_error : public model_error {
public:
    using model_error::model_error;
};

/// File could not be read or written (CLI exit code 4).
class io_error : public error {
public:
    using error::error;
};

}  // namespace demuxsr
