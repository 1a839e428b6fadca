#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "superlambda/analysis.hpp"
#include "superlambda/config.hpp"
#include "superlambda/trajectory.hpp"

namespace superlambda {

/// Engine version recorded in manifests.
std::string engine_version();

/// Physical-time output grid of an exact run described by `config`.
std::vector<double> exact_grid(const RunConfig& config);

/// Starting state of an exact run: initial_levels when given, otherwise the
/// first initial_excited atoms in |3> and the rest in |1>.
DensityMatrix exact_initial_state(const RunConfig& config);

CouplingSet make_couplings(const RunConfig& config);

/// Runs the engine of a meanfield, exact or single-atom config in memory.
Trajectory run_trajectory(const RunConfig& config);

/// Closed form for one atom: p3 = s33_0 exp[-2(g1+g2)t]; with
/// Omega = 0 the decayed population splits as g1 : g2. Same time columns as
/// the exact run.
Trajectory analytic_single_atom(const SystemParams& params,
                                std::span<const double> physical_grid);

nlohmann::json metrics_json(const PulseMetrics& m, const Trajectory& traj);

struct ColumnDeviation
{
    std::string column;
    double max_abs = 0.0;
    double rms = 0.0;
    bool pass = true;
};

struct CompareReport
{
    std::vector<ColumnDeviation> columns;
    double tolerance = 0.0;
    double overlap_start = 0.0;
    double overlap_end = 0.0;
    std::size_t samples = 0;
    bool pass = true;

    nlohmann::json to_json() const;
};

/// Resamples `b` onto the samples of `a` inside the common time range
/// (linear interpolation) and reports per-column deviations. Disjoint time
/// ranges and unknown columns throw ConfigError.
CompareReport compare(const Trajectory& a, const Trajectory& b,
                      const std::vector<std::string>& columns,
                      double tolerance);

struct RunResult
{
    int exit_code = 0;
    std::vector<std::string> artifacts; ///< paths written
    nlohmann::json manifest;
    std::string report; ///< human-readable summary
};

/// Executes a config end to end and writes its artifacts under out_dir.
/// Engine errors propagate as superlambda::Error; a failed comparison
/// returns exit code 5.
RunResult run(const RunConfig& config);

/// Recovers the config echoed in a manifest.
RunConfig config_from_manifest(const nlohmann::json& manifest);

} // namespace superlambda
