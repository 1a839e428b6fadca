#pragma once

#include <string>
#include <vector>

#include "superlambda/trajectory.hpp"

namespace superlambda {

struct PlotSeries
{
    std::string column;
    std::string label;
    std::string color;
};

struct PlotOptions
{
    std::string title;
    std::string x_column = "t_scaled_fast";
    std::string x_label = "mu1 gamma1 N t";
    std::string y_label;
    bool log_time = false;
    int width = 720;
    int height = 420;
};

/// Static SVG line chart of trajectory columns. With log_time, samples at
/// t <= 0 are skipped.
std::string svg_line_plot(const Trajectory& traj,
                          const std::vector<PlotSeries>& series,
                          const PlotOptions& options);

/// Populations panel: p1/N, p2/N, p3/N.
std::string populations_svg(const Trajectory& traj, bool log_time);
/// Intensities panel: I1, I2.
std::string intensities_svg(const Trajectory& traj, bool log_time);

} // namespace superlambda
