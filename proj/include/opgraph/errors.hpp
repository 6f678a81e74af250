#ifndef OPGRAPH_ERRORS_HPP
#define OPGRAPH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace opg {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input field does not match the declared edge type (shape, dtype, units).
class TypeError : public Error {
public:
    explicit TypeError(const std::string& msg) : Error("type error: " + msg) {}
};

/// Numeric-domain violation (non-finite input, log of non-positive value, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

/// Adjoint of a nonlinear node requested without an operating point.
class LinearizationError : public Error {
public:
    explicit LinearizationError(const std::string& msg)
        : Error("linearization point required: " + msg) {}
};

/// Dense materialization requested above the configured dimension cap.
class OracleTooLargeError : public Error {
public:
    explicit OracleTooLargeError(const std::string& msg)
        : Error("oracle too large: " + msg) {}
};

/// Malformed graph / registry / field file.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error("parse error: " + msg) {}
};

/// Runtime failure while evaluating a composed graph.
class CompositionError : public Error {
public:
    explicit CompositionError(const std::string& msg) : Error("composition error: " + msg) {}
};

/// Stage descriptor with contradictory answers.
class ClassificationError : public Error {
public:
    explicit ClassificationError(const std::string& msg)
        : Error("classification error: " + msg) {}
};

/// Graph exceeds the configured complexity bounds.
class ComplexityError : public Error {
public:
    explicit ComplexityError(const std::string& msg) : Error("complexity error: " + msg) {}
};

/// Invalid parameter record.
class ParamError : public Error {
public:
    explicit ParamError(const std::string& msg) : Error("invalid params: " + msg) {}
};

} // namespace opg

#endif
