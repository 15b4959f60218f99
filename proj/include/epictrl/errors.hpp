#pragma once

#include <stdexcept>
#include <string>

namespace epictrl {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Optimization problem proven infeasible (carries the phase-I certificate).
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, double max_violation)
        : Error(what), max_violation(max_violation) {}
    double max_violation;
};

// A size cap was exceeded (state-space, grid, ...).
class CapError : public Error {
public:
    explicit CapError(const std::string& what) : Error(what) {}
};

} // namespace epictrl
