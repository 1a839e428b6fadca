#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "superlambda/errors.hpp"

namespace superlambda {

/// Physical inputs of a driven Lambda ensemble.
///
/// Levels are |1>, |2> (lower doublet, driven at Rabi frequency `rabi`) and
/// |3> (upper). `gamma1`/`gamma2` are the single-atom rates of |3>->|1> and
/// |3>->|2>; an isolated atom leaves |3> as exp[-2(gamma1+gamma2)t].
/// `mu1`/`mu2` scale the pair couplings, so the collective rate of channel s
/// is mu_s * gamma_s * N.
struct SystemParams
{
    std::int64_t n_atoms = 1;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double mu1 = 1.0;
    double mu2 = 1.0;
    double rabi = 0.0;
    double initial_excited = 1.0;

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;

    /// gamma2 < gamma1, the regime of interest. Not enforced.
    bool weak_channel_ordering() const noexcept { return gamma2 < gamma1; }

    double collective_rate1() const noexcept
    {
        return mu1 * gamma1 * static_cast<double>(n_atoms);
    }
    double collective_rate2() const noexcept
    {
        return mu2 * gamma2 * static_cast<double>(n_atoms);
    }

    bool operator==(const SystemParams&) const = default;
};

/// Dimensionless groups used to report results.
struct ScaledParams
{
    double r_gamma = 1.0;   ///< gamma2 / gamma1
    double r_mu = 1.0;      ///< mu2 / mu1
    double omega_bar = 0.0; ///< rabi / (mu1 gamma1 N)
    double t_fast = 1.0;    ///< 1 / (mu1 gamma1 N)
    double t_slow = 1.0;    ///< 1 / (mu2 gamma2 N); infinite when gamma2 = 0
};

ScaledParams nondimensionalize(const SystemParams& params);

/// Inverse of nondimensionalize at fixed gamma1, N and initial excitation.
SystemParams denormalize(const ScaledParams& scaled, double gamma1,
                         std::int64_t n_atoms, double initial_excited);

/// Emitter positions and the wavenumbers omega_31/c, omega_32/c.
struct Geometry
{
    std::vector<Eigen::Vector3d> positions;
    double wavenumber1 = 1.0;
    double wavenumber2 = 1.0;

    /// Throws ConfigError("zero separation ...") on coincident emitters.
    void validate() const;

    double wavenumber(int channel) const;
};

/// Orientation-averaged dipole kernel at phase x = k r.
template <typename Scalar>
struct PairCoupling
{
    Scalar aleph;
    Scalar lamb;
    /// x == 0: lamb is divergent and has been replaced by 0.
    bool diagonal;
};

/// Returns (sin x / x, -cos x / x). At x == 0 the pair is a diagonal one:
/// aleph = 1 and the single-atom Lamb shift is absorbed, lamb = 0.
template <typename Scalar>
PairCoupling<Scalar> pairwise_coupling(Scalar x)
{
    using std::cos;
    using std::sin;
    if (x < Scalar(0) || !(x == x)) {
        throw ConfigError("pairwise_coupling: phase must be >= 0");
    }
    if (x == Scalar(0)) {
        return {Scalar(1), Scalar(0), true};
    }
    return {sin(x) / x, -cos(x) / x, false};
}

/// Pairwise rates gamma_jl^(s) = gamma_s [aleph_jl + i Omega_jl] of one
/// channel. The diagonal holds gamma_s with no shift.
Eigen::MatrixXcd coupling_matrix(const Geometry& geom, int channel,
                                 double gamma);

/// Geometry-free Dicke limit: every entry equals gamma.
Eigen::MatrixXcd dicke_coupling_matrix(std::int64_t n_atoms, double gamma);

/// Both channels' rate matrices, as consumed by the exact solver.
struct CouplingSet
{
    Eigen::MatrixXcd channel1;
    Eigen::MatrixXcd channel2;

    std::int64_t n_atoms() const { return channel1.rows(); }

    static CouplingSet dicke(const SystemParams& params);
    static CouplingSet from_geometry(const SystemParams& params,
                                     const Geometry& geom);
    /// No pair interaction at all: only the single-atom diagonal survives.
    static CouplingSet independent(const SystemParams& params);
};

} // namespace superlambda
