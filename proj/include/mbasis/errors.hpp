#pragma once

#include <stdexcept>
#include <string>

namespace mbasis {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed sequences, permutations, files, indices.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A selection scan ended without meeting its inequality, either because the
// scan cap was reached or because the coefficient table ran out of entries.
class ScanError : public Error {
public:
    ScanError(const std::string& msg, bool table_exhausted)
        : Error(msg), table_exhausted_(table_exhausted) {}
    bool table_exhausted() const { return table_exhausted_; }

private:
    bool table_exhausted_;
};

// Ambient dimension would exceed the configured guard.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A vector family is numerically rank deficient.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& msg, double singular_value_ratio)
        : Error(msg), ratio_(singular_value_ratio) {}
    double singular_value_ratio() const { return ratio_; }

private:
    double ratio_;
};

// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double last_estimate)
        : Error(msg), last_estimate_(last_estimate) {}
    double last_estimate() const { return last_estimate_; }

private:
    double last_estimate_;
};

// A request exceeds a hard combinatorial or dense-path size guard.
class SizeError : public Error {
public:
    using Error::Error;
};

}  // namespace mbasis
