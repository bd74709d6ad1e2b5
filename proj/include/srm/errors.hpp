#pragma once

#include <stdexcept>
#include <string>

namespace srm {

/// Bad configuration, bad file contents, invalid parameter ranges.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: infeasibility, non-convergence, ill-conditioning.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The per-point feasible set {f >= 0, g.f = target} is empty.
struct InfeasibleError : NumericError {
    explicit InfeasibleError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace srm
