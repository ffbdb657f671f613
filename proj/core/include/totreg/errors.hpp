#pragma once

#include <stdexcept>
#include <string>

namespace totreg {

/// Thrown when a manifold base point is rank-deficient (core matricization
/// loses rank), so the gauge quantities are not uniquely defined.
class DegeneratePointError : public std::runtime_error {
public:
    explicit DegeneratePointError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Thrown when a measurement design violates an invertibility precondition
/// (e.g. rank-deficient covariate matrix).
class DegenerateDesignError : public std::runtime_error {
public:
    explicit DegenerateDesignError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Thrown when an iterative numerical routine fails to produce a usable
/// result (non-convergence, annihilated gradient, singular system).
class NumericalFailureError : public std::runtime_error {
public:
    explicit NumericalFailureError(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace totreg
