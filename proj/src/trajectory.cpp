#include "superlambda/trajectory.hpp"

#include <algorithm>

#include "superlambda/errors.hpp"

namespace superlambda {

std::string_view to_string(TimeUnit unit)
{
    switch (unit) {
    case TimeUnit::fast_scaled: return "fast";
    case TimeUnit::slow_scaled: return "slow";
    case TimeUnit::physical: return "physical";
    }
    return "unknown";
}

TimeUnit time_unit_from_string(std::string_view name)
{
    if (name == "fast") {
        return TimeUnit::fast_scaled;
    }
    if (name == "slow") {
        return TimeUnit::slow_scaled;
    }
    if (name == "physical") {
        return TimeUnit::physical;
    }
    throw ConfigError("unknown time unit '" + std::string(name) +
                      "' (expected fast, slow or physical)");
}

Trajectory::Trajectory(Eigen::VectorXd times, TimeUnit unit)
    : times_(std::move(times)), unit_(unit)
{
}

void Trajectory::add_column(std::string name, Eigen::VectorXd values)
{
    if (values.size() != times_.size()) {
        throw ConfigError("trajectory column '" + name +
                          "' has the wrong length");
    }
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it != names_.end()) {
        columns_[static_cast<std::size_t>(it - names_.begin())] =
            std::move(values);
        return;
    }
    names_.push_back(std::move(name));
    columns_.push_back(std::move(values));
}

bool Trajectory::has_column(std::string_view name) const
{
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Eigen::VectorXd& Trajectory::column(std::string_view name) const
{
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        throw ConfigError("trajectory has no column '" + std::string(name) +
                          "'");
    }
    return columns_[static_cast<std::size_t>(it - names_.begin())];
}

void Trajectory::validate() const
{
    for (Eigen::Index i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw ConfigError("trajectory times are not strictly increasing");
        }
    }
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c].size() != times_.size()) {
            throw ConfigError("trajectory column '" + names_[c] +
                              "' has the wrong length");
        }
    }
}

} // namespace superlambda
