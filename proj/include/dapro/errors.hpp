#pragma once

#include <stdexcept>
#include <string>

namespace dapro {

/// Invalid configuration values (hazard parameters, budgets, unknown config keys).
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Phase-I observation cost meets or exceeds the total budget.
struct InfeasibleBudget : std::runtime_error {
    explicit InfeasibleBudget(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dapro
