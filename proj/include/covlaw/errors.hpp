#pragma once

#include <stdexcept>
#include <string>

namespace covlaw {

/// Precondition on the mathematical input failed (odd length, crossing pairing, arity...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A covariance or kernel violates complete positivity / trace symmetry.
class InvariantViolation : public std::runtime_error {
public:
    InvariantViolation(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Malformed configuration or polynomial text.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An exact computation would exceed its configured cost budget.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace covlaw
