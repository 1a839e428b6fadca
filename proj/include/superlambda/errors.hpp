#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace superlambda {

/// Error categories. Each maps onto one CLI exit code.
enum class ErrorKind { config, capacity, integration, comparison };

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Invalid parameters, malformed configuration, bad inputs.
class ConfigError : public Error
{
public:
    explicit ConfigError(const std::string& what)
        : Error(ErrorKind::config, what)
    {
    }
};

/// Requested problem exceeds what an engine is built to handle.
class CapacityError : public Error
{
public:
    explicit CapacityError(const std::string& what)
        : Error(ErrorKind::capacity, what)
    {
    }
};

/// Integrator gave up. Carries the last accepted time and state.
class IntegrationError : public Error
{
public:
    IntegrationError(const std::string& what, double last_time,
                     std::vector<double> last_state)
        : Error(ErrorKind::integration, what), last_time_(last_time),
          last_state_(std::move(last_state))
    {
    }

    double last_time() const noexcept { return last_time_; }
    const std::vector<double>& last_state() const noexcept
    {
        return last_state_;
    }

private:
    double last_time_;
    std::vector<double> last_state_;
};

class ComparisonError : public Error
{
public:
    explicit ComparisonError(const std::string& what)
        : Error(ErrorKind::comparison, what)
    {
    }
};

/// CLI exit code: 2 config, 3 capacity, 4 integration, 5 comparison-fail.
constexpr int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::capacity: return 3;
    case ErrorKind::integration: return 4;
    case ErrorKind::comparison: return 5;
    }
    return 1;
}

} // namespace superlambda
