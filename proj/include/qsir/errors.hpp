#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qsir {

/// Bad parameter, shape or dimension. Maps to CLI exit code 1.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sample holds fewer distinct points than requested code points.
class DistinctPointsError : public ArgumentError {
public:
    DistinctPointsError(std::size_t distinct, std::size_t requested)
        : ArgumentError("sample has " + std::to_string(distinct) +
                        " distinct points, " + std::to_string(requested) +
                        " code points requested"),
          distinct_(distinct), requested_(requested) {}

    std::size_t distinct() const noexcept { return distinct_; }
    std::size_t requested() const noexcept { return requested_; }

private:
    std::size_t distinct_;
    std::size_t requested_;
};

/// Singular or indefinite matrix met during a factorization.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(std::size_t pivot, double value)
        : std::runtime_error("matrix is not positive definite: pivot " +
                             std::to_string(pivot) + " = " + std::to_string(value)),
          pivot_(pivot), value_(value) {}

    std::size_t pivot() const noexcept { return pivot_; }
    double value() const noexcept { return value_; }

private:
    std::size_t pivot_;
    double value_;
};

/// Data carries no information for the requested fit (constant response,
/// constant index). Maps to CLI exit code 3.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A forecast query landed in an input cell that saw no training data.
class NoDataError : public std::runtime_error {
public:
    explicit NoDataError(std::size_t cell)
        : std::runtime_error("input cell " + std::to_string(cell) + " has no observations"),
          cell_(cell) {}

    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

/// Estimate and reference are orthogonal, so no sign can be chosen.
class AlignmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file content.
class ParseError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

} // namespace qsir
