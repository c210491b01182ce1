#pragma once

#include <stdexcept>
#include <string>

namespace bubblecs {

/// Invalid parameters or configuration (ordering, domain, empty ranges).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A scan range or evaluation point lies outside the supported domain.
class RangeError : public std::out_of_range {
public:
    explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A statistic is undefined for the given fit (zero variance, no explosiveness, ...).
class DegenerateFitError : public std::runtime_error {
public:
    explicit DegenerateFitError(const std::string& what) : std::runtime_error(what) {}
};

/// Floating-point overflow or underflow that would otherwise leak infinities.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Least-squares fit failure (rank deficiency, unsupported model form).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bubblecs
