#ifndef GLAESER_ERRORS_HPP
#define GLAESER_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace glaeser {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string formatPoint(const std::vector<double> &x);

// ---- expressions -------------------------------------------------------

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string &expected)
        : Error("syntax error at position " + std::to_string(position) + ": expected " + expected),
          position(position), expected(expected) {}
    std::size_t position;
    std::string expected;
};

class UnknownVariable : public Error {
public:
    explicit UnknownVariable(const std::string &name)
        : Error("unknown variable '" + name + "'"), name(name) {}
    std::string name;
};

class ArityError : public Error {
public:
    ArityError(const std::string &function, std::size_t expected, std::size_t got)
        : Error("function '" + function + "' takes " + std::to_string(expected) +
                " argument(s), got " + std::to_string(got)) {}
};

/// Evaluation failure at a point (division by zero, sqrt of a negative, no branch).
class EvalError : public Error {
public:
    EvalError(const std::string &what, std::vector<double> point)
        : Error(what + " at " + formatPoint(point)), reason(what), point(std::move(point)) {}
    std::string reason;
    std::vector<double> point;
};

class DivisionByZero : public EvalError {
public:
    explicit DivisionByZero(std::vector<double> point) : EvalError("division by zero", std::move(point)) {}
};

class SqrtOfNegative : public EvalError {
public:
    explicit SqrtOfNegative(std::vector<double> point) : EvalError("sqrt of negative value", std::move(point)) {}
};

class NoBranchApplies : public EvalError {
public:
    explicit NoBranchApplies(std::vector<double> point) : EvalError("no piecewise branch applies", std::move(point)) {}
};

// ---- linear algebra ----------------------------------------------------

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class EmptySubspace : public Error {
public:
    EmptySubspace() : Error("operation requires a nonempty affine subspace") {}
};

// ---- bundle ------------------------------------------------------------

class EmptyDomain : public Error {
public:
    EmptyDomain() : Error("no grid point satisfies the domain constraints") {}
};

class InsufficientSamples : public Error {
public:
    InsufficientSamples(std::size_t index, int shell, std::size_t count)
        : Error("interior shell " + std::to_string(shell) + " around sample " + std::to_string(index) +
                " holds only " + std::to_string(count) + " samples; raise the sampling level"),
          index(index), shell(shell) {}
    std::size_t index;
    int shell;
};

class NoStabilization : public Error {
public:
    NoStabilization(int iterations, double gap)
        : Error("refinement did not stabilize within " + std::to_string(iterations) +
                " iterations (last gap " + std::to_string(gap) + ")"),
          iterations(iterations), gap(gap) {}
    int iterations;
    double gap;
};

// ---- section -----------------------------------------------------------

class EmptyFiber : public Error {
public:
    EmptyFiber(std::size_t index, std::vector<double> point)
        : Error("empty fiber at sample " + std::to_string(index) + " " + formatPoint(point)),
          index(index), point(std::move(point)) {}
    std::size_t index;
    std::vector<double> point;
};

class UncoveredSample : public Error {
public:
    explicit UncoveredSample(std::size_t index)
        : Error("sample " + std::to_string(index) + " is not covered by any ball"), index(index) {}
    std::size_t index;
};

class AnchorNotInFiber : public Error {
public:
    AnchorNotInFiber(std::size_t center, double distance)
        : Error("anchor at sample " + std::to_string(center) + " lies " + std::to_string(distance) +
                " away from its fiber"),
          center(center) {}
    std::size_t center;
};

class EmptySubset : public Error {
public:
    EmptySubset() : Error("extension requires a nonempty sample subset") {}
};

class RecursionLimit : public Error {
public:
    explicit RecursionLimit(int depth)
        : Error("section recursion exceeded the ambient dimension (depth " + std::to_string(depth) + ")"),
          depth(depth) {}
    int depth;
};

// ---- files -------------------------------------------------------------

/// Malformed or inconsistent problem, section or report file.
class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace glaeser

#endif
