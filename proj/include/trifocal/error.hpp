#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace trifocal {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates a type invariant (non-finite coordinate, weight <= 0, p < 1, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The Euclidean gradient was requested at a focus, where it is undefined.
class EvaluationAtFocus : public Error {
public:
    using Error::Error;
};

class PreconditionViolation : public Error {
public:
    using Error::Error;
};

/// The level S is not a proper curve level (S <= S0). Carries S0 so callers can clamp.
class LevelBelowMinimum : public Error {
public:
    LevelBelowMinimum(const std::string& what, double s0) : Error(what), s0_(s0) {}
    double s0() const noexcept { return s0_; }

private:
    double s0_;
};

/// The sublevel set {f <= S} reaches the boundary of the sampling box.
class RegionNotContained : public Error {
public:
    using Error::Error;
};

class OutOfBounds : public Error {
public:
    using Error::Error;
};

/// Malformed scenario document; line is 1-based, 0 when the error is not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, std::string field)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line),
          field_(std::move(field)) {}
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

}  // namespace trifocal
