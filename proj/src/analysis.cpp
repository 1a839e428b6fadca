#include "superlambda/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace superlambda {

DickeResidual dicke_relation_residual(double p1, double p2, double ratio)
{
    if (p1 < 0.0 || p2 < 0.0) {
        throw ConfigError("dicke_relation_residual: populations must be >= 0");
    }
    const double lhs = std::log1p(p1);
    const double rhs = ratio * std::log1p(p2);
    const double diff = lhs - rhs;
    const double top = std::max(lhs, rhs);
    double residual;
    if (diff == 0.0) {
        residual = 0.0;
    } else if (top > std::log(std::numeric_limits<double>::max())) {
        residual = diff > 0.0 ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
    } else {
        // e^lhs - e^rhs = sign * e^top * (1 - e^-|diff|)
        residual = std::copysign(std::exp(top) * -std::expm1(-std::abs(diff)),
                                 diff);
    }
    return {residual, diff};
}

DressedDecomposition dressed_transform(const BareCorrelators& bare)
{
    DressedDecomposition d;
    const double sum = bare.q11 + bare.q22;
    d.d_mm = 0.5 * (sum - 2.0 * bare.q12.real());
    d.d_pp = 0.5 * (sum + 2.0 * bare.q12.real());
    d.cross = {0.5 * (bare.q22 - bare.q11), -bare.q12.imag()};
    return d;
}

BareCorrelators bare_from_dressed(const DressedDecomposition& d)
{
    BareCorrelators b;
    const double sum = d.d_mm + d.d_pp;
    b.q11 = 0.5 * (sum - 2.0 * d.cross.real());
    b.q22 = 0.5 * (sum + 2.0 * d.cross.real());
    b.q12 = {0.5 * (d.d_pp - d.d_mm), -d.cross.imag()};
    return b;
}

DressedDecomposition dressed_intensity_units(const BareCorrelators& bare,
                                             double n_atoms)
{
    return dressed_transform(bare).scaled(0.5 / (n_atoms * n_atoms));
}

std::optional<InterferenceReading>
interference_fraction(const DressedDecomposition& dd, int channel, double floor)
{
    if (channel != 1 && channel != 2) {
        throw ConfigError("interference_fraction: channel must be 1 or 2");
    }
    const double contribution =
        (channel == 1 ? -2.0 : 2.0) * dd.cross.real();
    const double total = dd.d_mm + dd.d_pp + contribution;
    if (!(std::abs(total) > floor)) {
        return std::nullopt;
    }
    return InterferenceReading{contribution / total, contribution > 0.0};
}

double independent_intensity_estimate(double gamma1, double gamma2,
                                      double n_atoms)
{
    if (!(gamma1 > 0.0 && gamma2 >= 0.0 && n_atoms > 0.0)) {
        throw ConfigError("independent_intensity_estimate: invalid rates");
    }
    const double r = gamma2 / gamma1;
    return gamma2 * n_atoms * r / (1.0 + r);
}

double collective_intensity_estimate(double gamma2, double mu2,
                                     double n_atoms)
{
    if (!(gamma2 > 0.0 && mu2 > 0.0 && n_atoms > 0.0)) {
        throw ConfigError("collective_intensity_estimate: inputs must be > 0");
    }
    return gamma2 * mu2 * n_atoms * n_atoms;
}

Eigen::VectorXd time_derivative(std::span<const double> t,
                                std::span<const double> v)
{
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    if (n < 2) {
        return d;
    }
    if (n == 2) {
        d.setConstant((v[1] - v[0]) / (t[1] - t[0]));
        return d;
    }
    {
        // One-sided three-point stencils at the ends.
        const double h1 = t[1] - t[0], h2 = t[2] - t[1];
        d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * v[0] +
               (h1 + h2) / (h1 * h2) * v[1] - h1 / (h2 * (h1 + h2)) * v[2];
        const double g1 = t[n - 2] - t[n - 3], g2 = t[n - 1] - t[n - 2];
        d[n - 1] = g2 / (g1 * (g1 + g2)) * v[n - 3] -
                   (g1 + g2) / (g1 * g2) * v[n - 2] +
                   (2 * g2 + g1) / (g2 * (g1 + g2)) * v[n - 1];
    }
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        // Second-order accurate on nonuniform spacing.
        const double hl = t[i] - t[i - 1];
        const double hr = t[i + 1] - t[i];
        d[i] = (hl * hl * v[i + 1] - hr * hr * v[i - 1] +
                (hr * hr - hl * hl) * v[i]) /
               (hl * hr * (hl + hr));
    }
    return d;
}

double integrate_trapezoid(std::span<const double> t,
                           std::span<const double> v)
{
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        acc += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
    }
    return acc;
}

namespace {

// Slope produced by rounding alone when differencing a constant series.
double slope_noise(std::span<const double> t, std::span<const double> v)
{
    double vmax = 0.0, hmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        vmax = std::max(vmax, std::abs(v[i]));
        if (i > 0) {
            hmin = std::min(hmin, t[i] - t[i - 1]);
        }
    }
    return 16 * std::numeric_limits<double>::epsilon() * vmax / hmin;
}

std::vector<Interval> plateaus_in_range(std::span<const double> t,
                                        const Eigen::VectorXd& slope,
                                        std::size_t first, std::size_t last,
                                        double slope_fraction,
                                        double min_duration_fraction,
                                        double noise)
{
    std::vector<Interval> out;
    if (last <= first) {
        return out;
    }
    double max_slope = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        max_slope = std::max(max_slope, std::abs(slope[i]));
    }
    const double range = t[last] - t[first];
    if (max_slope <= noise) {
        out.push_back({t[first], t[last]});
        return out;
    }
    const double threshold = std::max(slope_fraction * max_slope, noise);
    std::size_t i = first;
    while (i <= last) {
        if (std::abs(slope[i]) >= threshold) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 <= last && std::abs(slope[j + 1]) < threshold) {
            ++j;
        }
        const Interval iv{t[i], t[j]};
        if (iv.duration() >= min_duration_fraction * range &&
            iv.duration() > 0.0) {
            out.push_back(iv);
        }
        i = j + 1;
    }
    return out;
}

} // namespace

std::vector<Interval> detect_plateaus(std::span<const double> times,
                                      std::span<const double> values,
                                      double slope_fraction,
                                      double min_duration_fraction)
{
    if (times.size() != values.size()) {
        throw ConfigError("detect_plateaus: length mismatch");
    }
    if (times.empty()) {
        return {};
    }
    const Eigen::VectorXd slope = time_derivative(times, values);
    return plateaus_in_range(times, slope, 0, times.size() - 1,
                             slope_fraction, min_duration_fraction,
                             slope_noise(times, values));
}

PulseMetrics pulse_metrics(const Trajectory& traj,
                           const PulseMetricsOptions& options)
{
    if (traj.size() == 0) {
        throw ConfigError("pulse_metrics: empty trajectory");
    }
    const auto t = as_span(traj.times());
    const Eigen::VectorXd& i1 = traj.column("I1");
    const Eigen::VectorXd& i2 = traj.column("I2");
    const Eigen::VectorXd& p1 = traj.column("p1_over_N");
    const Eigen::VectorXd& p2 = traj.column("p2_over_N");
    const Eigen::VectorXd& p3 = traj.column("p3_over_N");

    PulseMetrics m;
    m.i1_peaks = find_peaks(t, as_span(i1), options.prominence_fraction);
    m.i2_peaks = find_peaks(t, as_span(i2), options.prominence_fraction);
    m.i1_peak_count = m.i1_peaks.size();

    auto global_peak = [&](const Eigen::VectorXd& v) -> std::optional<Peak> {
        Eigen::Index k;
        const double value = v.maxCoeff(&k);
        if (!(value > 0.0)) {
            return std::nullopt;
        }
        return Peak{static_cast<std::size_t>(k), t[static_cast<std::size_t>(k)],
                    value, value - v.minCoeff()};
    };
    m.i1_peak = global_peak(i1);
    m.i2_peak = global_peak(i2);
    if (m.i2_peak) {
        const auto k = static_cast<Eigen::Index>(m.i2_peak->index);
        m.p2_minus_p3_at_i2_peak = p2[k] - p3[k];
        m.p1_at_i2_peak = p1[k];
        m.i1_at_i2_peak = i1[k];
    }
    m.i1_energy = integrate_trapezoid(t, as_span(i1));
    m.i2_energy = integrate_trapezoid(t, as_span(i2));

    // Decay window: p3 between the upper and lower fractions of p3(0).
    const std::size_t n = t.size();
    std::size_t first = n, last = n - 1;
    if (p3[0] > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            if (p3[static_cast<Eigen::Index>(i)] <=
                options.decay_window_upper * p3[0]) {
                first = i;
                break;
            }
        }
        if (first < n) {
            for (std::size_t i = first; i < n; ++i) {
                if (p3[static_cast<Eigen::Index>(i)] <=
                    options.decay_window_lower * p3[0]) {
                    last = i;
                    break;
                }
            }
            m.decay_window = Interval{t[first], t[last]};
        }
    }
    if (first >= n) {
        first = 0;
        last = n - 1;
    }
    const Eigen::VectorXd slope = time_derivative(t, as_span(p3));
    const auto found =
        plateaus_in_range(t, slope, first, last,
                          options.plateau_slope_fraction,
                          options.plateau_min_duration_fraction,
                          slope_noise(t, as_span(p3)));
    if (!found.empty()) {
        m.p3_plateau = *std::max_element(
            found.begin(), found.end(), [](const Interval& a, const Interval& b) {
                return a.duration() < b.duration();
            });
        if (m.i2_peak) {
            const double d = m.p3_plateau->duration();
            m.plateau_near_i2_peak = m.i2_peak->time >= m.p3_plateau->start - d &&
                                     m.i2_peak->time <= m.p3_plateau->end + d;
        }
    }
    return m;
}

InversionSlopeComparison inversion_slope_diagnostic(const Trajectory& traj)
{
    const auto& meta = traj.metadata();
    bool two_level;
    if (meta.contains("params")) {
        two_level = meta["params"].value("gamma2", 1.0) == 0.0 &&
                    meta["params"].value("rabi", 1.0) == 0.0;
    } else {
        two_level = traj.column("p2_over_N").cwiseAbs().maxCoeff() == 0.0 &&
                    traj.column("I2").cwiseAbs().maxCoeff() == 0.0;
    }
    if (!two_level) {
        throw ConfigError("inversion slope diagnostic applies only to two-level "
                          "runs (gamma2 = 0, Omega = 0)");
    }
    const auto t = as_span(traj.times());
    const Eigen::VectorXd inversion =
        0.5 * (traj.column("p3_over_N") - traj.column("p1_over_N"));
    InversionSlopeComparison out;
    out.times = traj.times();
    out.intensity = traj.column("I1");
    out.slope = -time_derivative(t, as_span(inversion));

    auto rescale = [](Eigen::VectorXd& v) {
        const double peak = v.cwiseAbs().maxCoeff();
        if (peak > 0.0) {
            v /= peak;
        }
        return peak > 0.0;
    };
    const bool a = rescale(out.intensity);
    const bool b = rescale(out.slope);
    out.max_deviation = (out.intensity - out.slope).cwiseAbs().maxCoeff();
    if (a && b) {
        const Eigen::ArrayXd x = out.intensity.array() - out.intensity.mean();
        const Eigen::ArrayXd y = out.slope.array() - out.slope.mean();
        out.correlation =
            (x * y).sum() / std::sqrt((x * x).sum() * (y * y).sum());
    }
    return out;
}

} // namespace superlambda
