#include "superlambda/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "superlambda/io.hpp"

namespace superlambda {

namespace {

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string svg_line_plot(const Trajectory& traj,
                          const std::vector<PlotSeries>& series,
                          const PlotOptions& opt)
{
    const Eigen::VectorXd& xs = traj.column(opt.x_column);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        if (!opt.log_time || xs[i] > 0.0) {
            keep.push_back(i);
        }
    }
    auto xmap = [&](double x) { return opt.log_time ? std::log10(x) : x; };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    for (Eigen::Index i : keep) {
        x0 = std::min(x0, xmap(xs[i]));
        x1 = std::max(x1, xmap(xs[i]));
        for (const auto& s : series) {
            const double y = traj.column(s.column)[i];
            if (std::isfinite(y)) {
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
    }
    if (keep.empty()) {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if (x1 <= x0) {
        x1 = x0 + 1.0;
    }
    y0 = std::min(y0, 0.0);
    if (y1 <= y0) {
        y1 = y0 + 1.0;
    }

    const double left = 70, right = 20, top = 40, bottom = 50;
    const double pw = opt.width - left - right;
    const double ph = opt.height - top - bottom;
    auto px = [&](double x) { return left + (xmap(x) - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(opt.width) + "\" height=\"" +
         std::to_string(opt.height) + "\" font-family=\"sans-serif\" "
         "font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(left) + "\" y=\"24\" font-size=\"14\">" +
         escape(opt.title) + "</text>\n";
    s += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" +
         fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4.0;
        const double gx = left + pw * k / 4.0;
        const double value = opt.log_time ? std::pow(10.0, fx) : fx;
        s += "<text x=\"" + fmt(gx) + "\" y=\"" + fmt(top + ph + 16) +
             "\" text-anchor=\"middle\">" + tick_label(value) + "</text>\n";
        const double fy = y0 + (y1 - y0) * k / 4.0;
        s += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(py(fy) + 4) +
             "\" text-anchor=\"end\">" + tick_label(fy) + "</text>\n";
    }
    s += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" +
         fmt(opt.height - 10.0) + "\" text-anchor=\"middle\">" +
         escape(opt.x_label) + (opt.log_time ? " (log)" : "") + "</text>\n";
    s += "<text transform=\"translate(16," + fmt(top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(opt.y_label) +
         "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& ser = series[k];
        const Eigen::VectorXd& ys = traj.column(ser.column);
        s += "<polyline fill=\"none\" stroke=\"" + ser.color +
             "\" stroke-width=\"1.5\" points=\"";
        for (Eigen::Index i : keep) {
            if (std::isfinite(ys[i])) {
                s += fmt(px(xs[i])) + "," + fmt(py(ys[i])) + " ";
            }
        }
        s += "\"/>\n";
        const double ly = top + 14.0 + 16.0 * static_cast<double>(k);
        s += "<line x1=\"" + fmt(left + pw - 90) + "\" y1=\"" + fmt(ly - 4) +
             "\" x2=\"" + fmt(left + pw - 70) + "\" y2=\"" + fmt(ly - 4) +
             "\" stroke=\"" + ser.color + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + fmt(left + pw - 64) + "\" y=\"" + fmt(ly) + "\">" +
             escape(ser.label) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string populations_svg(const Trajectory& traj, bool log_time)
{
    PlotOptions opt;
    opt.title = "Populations";
    opt.y_label = "population / N";
    opt.log_time = log_time;
    return svg_line_plot(traj,
                         {{"p1_over_N", "p1/N", "#1f77b4"},
                          {"p2_over_N", "p2/N", "#d62728"},
                          {"p3_over_N", "p3/N", "#2ca02c"}},
                         opt);
}

std::string intensities_svg(const Trajectory& traj, bool log_time)
{
    PlotOptions opt;
    opt.title = "Superradiant intensities";
    opt.y_label = "intensity (q / N^2)";
    opt.log_time = log_time;
    return svg_line_plot(traj,
                         {{"I1", "I1", "#1f77b4"}, {"I2", "I2", "#d62728"}},
                         opt);
}

} // namespace superlambda
