#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace qcl {

/// Failure inside an integrator or estimator. Carries the simulation time when known.
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& what, std::optional<double> time = std::nullopt)
        : std::runtime_error(what), time_(time) {}

    std::optional<double> time() const { return time_; }

private:
    std::optional<double> time_;
};

/// Invalid configuration or arguments that violate a documented precondition.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace qcl
