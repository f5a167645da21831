#pragma once

#include <stdexcept>
#include <string>

namespace semiwave {

/// Thrown when an equation that should have a real root in the requested
/// regime has none (e.g. decay exponents below the minimal speed).
struct NoRealRootError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Thrown when a rate-selection problem has no feasible point at all.
struct InfeasibleError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Bad solver/grid configuration (CFL violation, delay not divisible, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A simulation failed mid-run (blow-up guard, non-finite values).
struct NumericalError : std::runtime_error {
    double last_valid_time = 0.0;
    explicit NumericalError(const std::string& what, double t = 0.0)
        : std::runtime_error(what), last_valid_time(t) {}
};

}  // namespace semiwave
