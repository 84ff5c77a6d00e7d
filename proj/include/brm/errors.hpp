#pragma once

#include <stdexcept>
#include <string>

namespace brm {

/// Input fails a documented precondition (shape, range, schema).
struct DomainError : std::invalid_argument {
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Dataset lacks coverage required by the operation (missing (s,a) pairs,
/// dual coordinate lookups outside the visited set, exhausted retry budget).
struct CoverageError : std::runtime_error {
    explicit CoverageError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver exceeded its iteration budget before reaching tolerance.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// SGDA produced a non-finite iterate; carries the step index in the message.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Stepsize schedule is incompatible with a closed-form bound
/// (nonpositive geometric denominator).
struct ScheduleError : std::runtime_error {
    explicit ScheduleError(const std::string& what) : std::runtime_error(what) {}
};

/// Artifact on disk does not match its declared schema.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace brm
