#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace superlambda {

inline std::span<const double> as_span(const Eigen::VectorXd& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Unit of a trajectory's primary time axis.
enum class TimeUnit {
    fast_scaled, ///< mu1 gamma1 N t
    slow_scaled, ///< mu2 gamma2 N t
    physical
};

std::string_view to_string(TimeUnit unit);
TimeUnit time_unit_from_string(std::string_view name);

/// Time series of named observables plus run metadata.
class Trajectory
{
public:
    Trajectory() = default;
    Trajectory(Eigen::VectorXd times, TimeUnit unit);

    const Eigen::VectorXd& times() const { return times_; }
    TimeUnit unit() const { return unit_; }
    Eigen::Index size() const { return times_.size(); }

    void add_column(std::string name, Eigen::VectorXd values);
    bool has_column(std::string_view name) const;
    const Eigen::VectorXd& column(std::string_view name) const;
    const std::vector<std::string>& column_names() const { return names_; }

    nlohmann::json& metadata() { return metadata_; }
    const nlohmann::json& metadata() const { return metadata_; }

    /// Throws ConfigError if times are not strictly increasing or a column
    /// length differs from the time axis.
    void validate() const;

private:
    Eigen::VectorXd times_;
    TimeUnit unit_ = TimeUnit::slow_scaled;
    std::vector<std::string> names_;
    std::vector<Eigen::VectorXd> columns_;
    nlohmann::json metadata_ = nlohmann::json::object();
};

} // namespace superlambda
