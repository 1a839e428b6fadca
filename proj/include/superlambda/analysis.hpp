#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "superlambda/integrator.hpp"
#include "superlambda/trajectory.hpp"

namespace superlambda {

/// Upper-level population of one isolated atom, s33_0 exp[-2(g1+g2)t].
template <typename Scalar>
Scalar single_atom_decay(Scalar t, Scalar gamma1, Scalar gamma2,
                         Scalar s33_0)
{
    using std::exp;
    if (t < Scalar(0)) {
        throw ConfigError("single_atom_decay: t must be >= 0");
    }
    return s33_0 * exp(Scalar(-2) * (gamma1 + gamma2) * t);
}

struct DickeResidual
{
    /// (p1+1) - (p2+1)^ratio; +-inf when either side overflows a double.
    double residual;
    /// ln(p1+1) - ratio * ln(p2+1), always finite.
    double log_residual;
};

/// Population relation of a purely cooperative cascade out of |3>.
DickeResidual dicke_relation_residual(double p1, double p2, double ratio);

/// Superradiant correlators in the dressed basis |+-> = (|2> +- |1>)/sqrt 2.
///
/// Values are j != l sums: d_mm = <R3- R-3>, d_pp = <R3+ R+3>,
/// cross = <R3- R+3>, related to the bare ones by
///   d_mm  = (q11 + q22 - 2 Re q12) / 2
///   d_pp  = (q11 + q22 + 2 Re q12) / 2
///   cross = (q22 - q11) / 2 - i Im q12.
struct DressedDecomposition
{
    double d_mm = 0.0;
    double d_pp = 0.0;
    std::complex<double> cross{0.0, 0.0};

    /// Signed contributions <R3-R-3>, <R3+R+3>, <R3-R+3>, <R3+R-3> to each
    /// channel; their sums are i1() and i2().
    std::array<double, 4> i1_parts() const
    {
        return {d_mm, d_pp, -cross.real(), -cross.real()};
    }
    std::array<double, 4> i2_parts() const
    {
        return {d_mm, d_pp, cross.real(), cross.real()};
    }
    double i1() const { return d_mm + d_pp - 2.0 * cross.real(); }
    double i2() const { return d_mm + d_pp + 2.0 * cross.real(); }

    DressedDecomposition scaled(double factor) const
    {
        return {d_mm * factor, d_pp * factor, cross * factor};
    }
};

struct BareCorrelators
{
    double q11 = 0.0;
    double q22 = 0.0;
    std::complex<double> q12{0.0, 0.0};
};

DressedDecomposition dressed_transform(const BareCorrelators& bare);
BareCorrelators bare_from_dressed(const DressedDecomposition& dressed);

/// Dressed values in intensity units: scaled by 1 / (2 N^2) so that
/// i1() == q11 / N^2 and i2() == q22 / N^2.
DressedDecomposition dressed_intensity_units(const BareCorrelators& bare,
                                             double n_atoms);

struct InterferenceReading
{
    /// Cross-term contribution divided by the channel's total intensity.
    double fraction;
    /// Cross-term contribution enhances the channel.
    bool constructive;
};

/// Share of channel `channel`'s intensity carried by the cross terms.
/// Returns nullopt when the channel intensity is below `floor` (in the
/// decomposition's own units).
std::optional<InterferenceReading>
interference_fraction(const DressedDecomposition& dd, int channel,
                      double floor = 1e-12);

/// gamma2 N (gamma2/gamma1) / (1 + gamma2/gamma1), the slow-channel output
/// of N independent atoms.
double independent_intensity_estimate(double gamma1, double gamma2,
                                      double n_atoms);

/// gamma2 mu2 N^2, the collective slow-channel peak scale.
double collective_intensity_estimate(double gamma2, double mu2,
                                     double n_atoms);

struct Interval
{
    double start;
    double end;
    double duration() const { return end - start; }
};

/// Maximal runs where |d series / dt| stays below slope_fraction times its
/// maximum over the inspected range and that last at least
/// min_duration_fraction of the range. A series with no slope at all is one
/// plateau spanning the range.
std::vector<Interval> detect_plateaus(std::span<const double> times,
                                      std::span<const double> values,
                                      double slope_fraction = 0.02,
                                      double min_duration_fraction = 0.01);

struct PulseMetricsOptions
{
    double prominence_fraction = 0.05;
    double plateau_slope_fraction = 0.02;
    double plateau_min_duration_fraction = 0.01;
    /// p3 / p3(0) band that defines the decay window searched for plateaus.
    double decay_window_upper = 0.95;
    double decay_window_lower = 0.05;
};

struct PulseMetrics
{
    std::optional<Peak> i1_peak;
    std::optional<Peak> i2_peak;
    std::vector<Peak> i1_peaks;
    std::vector<Peak> i2_peaks;
    std::size_t i1_peak_count = 0;

    /// Evaluated at the I2 maximum.
    double p2_minus_p3_at_i2_peak = 0.0;
    double p1_at_i2_peak = 0.0;
    double i1_at_i2_peak = 0.0;

    std::optional<Interval> decay_window;
    std::optional<Interval> p3_plateau;
    bool plateau_near_i2_peak = false;

    /// Trapezoidal time integrals on the trajectory's own axis.
    double i1_energy = 0.0;
    double i2_energy = 0.0;
};

/// Peak, plateau and energy summary of a trajectory with columns I1, I2,
/// p1_over_N, p2_over_N and p3_over_N. Throws ConfigError when empty.
PulseMetrics pulse_metrics(const Trajectory& traj,
                           const PulseMetricsOptions& options = {});

struct InversionSlopeComparison
{
    Eigen::VectorXd times;
    Eigen::VectorXd intensity;  ///< I1 rescaled to unit peak
    Eigen::VectorXd slope;      ///< -d(p3 - p1)/dt / 2 rescaled to unit peak
    double max_deviation = 0.0;
    /// Pearson correlation; absent when a series is identically zero.
    std::optional<double> correlation;
};

/// Compares I1 with the inversion slope of a two-level run (gamma2 = 0,
/// Omega = 0). Any other regime is refused with ConfigError.
InversionSlopeComparison inversion_slope_diagnostic(const Trajectory& traj);

/// Central-difference derivative on a nonuniform grid.
Eigen::VectorXd time_derivative(std::span<const double> times,
                                std::span<const double> values);

/// Trapezoidal integral.
double integrate_trapezoid(std::span<const double> times,
                           std::span<const double> values);

} // namespace superlambda
