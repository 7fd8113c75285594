#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdcal {

/// Malformed or inconsistent user input (CSV rows, flags, schemas).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    /// 1-based line in the offending file, or 0 when not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// The numerics could not produce a valid answer for valid input.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BracketError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Sample variance too large for any beta distribution with the sample mean.
class VarianceTooLargeError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Too few simulated pairs satisfied the order constraint.
class InsufficientAcceptanceError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Sweep passes exhausted without reaching nondecreasing means.
class NonMonotoneError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace pdcal
