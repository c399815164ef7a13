#pragma once

#include <stdexcept>
#include <string>

namespace hardyheat {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Gamma-function pole (nonpositive integer argument) or an excluded
/// parameter surface of a closed-form constant.
class PoleError : public DomainError {
public:
    explicit PoleError(const std::string& what) : DomainError(what) {}
};

/// Coupling constant beyond the critical value where requested operation
/// requires a subcritical one.
class SupercriticalError : public DomainError {
public:
    explicit SupercriticalError(const std::string& what) : DomainError(what) {}
};

/// An iterative numerical procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hardyheat
