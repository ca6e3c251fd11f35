#pragma once

#include <stdexcept>
#include <string>

namespace hyperlattice {

/// Argument outside the mathematical domain of an operation (N < 1, c <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid configuration: sampler bounds, overrides, unknown presets.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs that do not belong together (mismatched grids, foreign states).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Linear solve failed or produced an unacceptable residual.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double omega = 0.0)
        : std::runtime_error(what), omega_(omega) {}

    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

} // namespace hyperlattice
