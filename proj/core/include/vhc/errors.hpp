#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vhc {

// Raised by the expression parser. `offset` is the byte offset into the
// source text where the problem was detected.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UnknownIdentifierError : public ParseError {
public:
    UnknownIdentifierError(const std::string& name, std::size_t offset)
        : ParseError("unknown identifier '" + name + "'", offset), name_(name) {}

    const std::string& name() const { return name_; }

private:
    std::string name_;
};

// Raised by expression evaluation: unbound variables and domain errors
// (division by zero, ln of a non-positive value, sqrt of a negative value).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model file / model validation failures. CLI exit code 2.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failures: singular reduction, quadrature non-convergence,
// unmet hypotheses, step-size underflow where fatal. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vhc
