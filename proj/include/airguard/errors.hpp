#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace airguard {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input (frame bytes, rule text, scenario JSON). Carries the
// 1-indexed byte offset or column where parsing stopped.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t position)
        : Error(msg + " (at position " + std::to_string(position) + ")"),
          position_(position)
    {
    }

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

// A structurally invalid value (inconsistent frame fields, bad rule
// parameters, bad scenario references). Names the offending field.
class ValidationError : public Error {
public:
    ValidationError(const std::string& field, const std::string& msg)
        : Error(field + ": " + msg), field_(field)
    {
    }

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Rule evaluation failed (e.g. an RSS match without reception metadata).
class EvalError : public Error {
public:
    using Error::Error;
};

} // namespace airguard
