#pragma once

#include <stdexcept>
#include <string>

namespace spectop {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (OBJ records, config files). Carries a 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

/// Inconsistent combinatorial structure (bad indices, missing edges, degenerate faces).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// An argument outside the operation's stated domain of validity.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A value outside the mathematical domain of a function (e.g. log of a nonpositive number).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative solver failed to converge; carries the best residual reached.
class SolverError : public Error {
public:
    SolverError(const std::string& message, double residual)
        : Error(message + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const { return residual_; }

private:
    double residual_;
};

/// Wire-format violations: unknown magic or version.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Checksum mismatch on a received frame.
class CorruptionError : public Error {
public:
    using Error::Error;
};

/// Frame byte count inconsistent with its declared mode count.
class LengthError : public Error {
public:
    using Error::Error;
};

} // namespace spectop
