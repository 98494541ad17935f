#pragma once

#include <stdexcept>
#include <string>

namespace apal {

/// Invalid or inconsistent configuration (bounds, kernel params, schedules).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of an operation (empty sets, r <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Bad data supplied by a caller or oracle (non-finite observations, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Factorization failed even after the jitter ladder was exhausted.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double jitter)
        : std::runtime_error(what + " (last jitter " + std::to_string(jitter) + ")"), jitter_(jitter)
    {
    }

    double jitter() const noexcept { return jitter_; }

private:
    double jitter_;
};

} // namespace apal
