#ifndef GAPGRAD_ERRORS_HPP
#define GAPGRAD_ERRORS_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapgrad {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File-format error; message names the offending line/field.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Bad argument to an API call (precondition violation).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The forward problem is infeasible for the requested objective.
class InfeasibleForward : public Error {
public:
    using Error::Error;
};

/// The forward problem is unbounded for the requested objective.
class UnboundedForward : public Error {
public:
    using Error::Error;
};

/// Backend ran out of its time budget. Carries the incumbent if one exists.
class SolveTimeout : public Error {
public:
    SolveTimeout(const std::string& what, std::optional<std::vector<double>> incumbent)
        : Error(what), incumbent_values(std::move(incumbent)) {}

    std::optional<std::vector<double>> incumbent_values;
};

/// Unexpected failure inside the solver backend.
class BackendError : public Error {
public:
    using Error::Error;
};

}  // namespace gapgrad

#endif
