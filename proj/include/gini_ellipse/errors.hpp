#pragma once

#include <stdexcept>
#include <string>

namespace gini_ellipse {

// Bad user input (malformed matrix, invalid parameters, dimension mismatch).
// The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A hard cap was exceeded (factorial enumeration, memory). Exit code 2.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// The requested comparison falls outside the hypotheses of the implemented
// theory (e.g. the two models do not share a generator). Exit code 3.
class HypothesisError : public std::runtime_error {
public:
    explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: matrix not PSD, rank deficiency, non-normalizable
// density, degenerate rate. Exit code 2.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gini_ellipse
