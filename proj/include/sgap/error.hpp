#pragma once

#include <stdexcept>
#include <string>

namespace sgap {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
    success = 0,
    invalid_argument = 2,
    numerical_failure = 3,
    io_failure = 4,
};

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    [[nodiscard]] virtual ExitCode exit_code() const noexcept = 0;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::invalid_argument; }
};

/// floor(n_s * ratio) == 0: no source would be kept.
class DegenerateRatio : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class NumericalError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::numerical_failure; }
};

/// Spectral input without any nonzero entry.
class DegenerateInput : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An iterative solver hit its cap. Carries the last estimates.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double last_sigma1, double last_sigma2, int iterations)
        : NumericalError(what), last_sigma1(last_sigma1), last_sigma2(last_sigma2), iterations(iterations) {}

    double last_sigma1;
    double last_sigma2;
    int iterations;
};

class IoError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::io_failure; }
};

} // namespace sgap
