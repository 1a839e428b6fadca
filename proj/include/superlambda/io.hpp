#pragma once

#include <string>
#include <vector>

#include "superlambda/trajectory.hpp"

namespace superlambda {

/// Column order of every trajectory CSV.
const std::vector<std::string>& csv_schema();

/// Shortest text with 17 significant digits ("%.17g"), locale-independent.
std::string format_g17(double x);

/// Header plus one row per sample: the schema columns in order, then any
/// `extra` columns. Missing schema columns are an error.
std::string trajectory_csv(const Trajectory& traj,
                           const std::vector<std::string>& extra = {});

/// Parses a CSV written by trajectory_csv (or any numeric CSV with a header).
/// The axis is `time_column`, which must be strictly increasing.
Trajectory read_trajectory_csv(const std::string& text,
                               const std::string& time_column = "t_scaled_fast");

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Writes bytes, creating parent directories. ConfigError when unwritable.
void write_file(const std::string& path, const std::string& bytes);

} // namespace superlambda
