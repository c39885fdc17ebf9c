#pragma once

#include <stdexcept>
#include <string>

namespace vmt {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameters, malformed configuration, schema violations. CLI exit code 1.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Numerical failure: truncation leakage, non-convergence, degenerate steady
// state, insufficient decay, term-budget overflow. CLI exit code 2.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

// A comparison ran fine but exceeded its agreement cutoff. CLI exit code 3.
class ComparisonError : public Error {
public:
    explicit ComparisonError(const std::string& msg) : Error(msg) {}
};

} // namespace vmt
