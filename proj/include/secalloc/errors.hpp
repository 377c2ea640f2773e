#pragma once

#include <stdexcept>
#include <string>

namespace secalloc {

// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data violates a documented invariant (bad ids, broken tables, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// A file could not be read or decoded; message carries field/line context.
class ParseError : public Error {
public:
    using Error::Error;
};

// A run parameter is out of its legal range.
class ConfigError : public Error {
public:
    using Error::Error;
};

// LP pivoting broke down on a degenerate instance.
class NumericalError : public Error {
public:
    using Error::Error;
};

// The constraint system admits no feasible point.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Solver output failed the independent re-scoring consistency check.
class SolverBugError : public Error {
public:
    using Error::Error;
};

// Exhaustive enumeration would exceed its work guard.
class BudgetExceededError : public Error {
public:
    using Error::Error;
};

} // namespace secalloc
