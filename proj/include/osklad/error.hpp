#pragma once

#include <stdexcept>
#include <string>

namespace osklad {

/// Failure categories. The CLI maps them to exit codes 1, 2 and 3.
enum class ErrorKind { InvalidArgument, Data, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Bad parameters: budget out of range, infeasible C, non-positive bandwidth.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

/// Bad inputs: dimension mismatch, non-finite values, malformed files.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// Solver non-convergence or a degenerate kernel.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual = 0.0)
        : Error(ErrorKind::Numerical, what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace osklad
