#pragma once

#include <complex>
#include <string>

#include <Eigen/Core>

#include "superlambda/integrator.hpp"
#include "superlambda/model.hpp"
#include "superlambda/trajectory.hpp"

namespace superlambda {

/// Smallest ensemble accepted by the mean-field simulation. The closure
/// assumes N >> 1; small samples belong to the exact solver.
constexpr std::int64_t kMinMeanFieldAtoms = 10;

/// Collective mean-field variables.
///
///   p_a  = sum_j <S_aa^(j)>
///   c12  = sum_j <S_12^(j)>
///   q11  = sum_{j!=l} <S_31^(j) S_13^(l)>,  q22 likewise on |3>-|2>
///   q12  = sum_{j!=l} <S_31^(j) S_23^(l)>
///   w12  = sum_{j!=l} <S_21^(j) S_12^(l)>, not dynamical: the closure only
///          ever needs its factorised value N(N-1)|c12/N|^2.
///
/// Optical coherences <S_13>, <S_23> and every moment with unequal numbers
/// of raising and lowering operators on |3> vanish identically from the
/// excited initial state, so they are not carried.
template <typename Scalar = double>
struct CorrelatorState
{
    Scalar p1 = 0, p2 = 0, p3 = 0;
    std::complex<Scalar> c12{0, 0};
    Scalar q11 = 0, q22 = 0;
    std::complex<Scalar> q12{0, 0};
    Scalar w12 = 0;
};

enum class SeedKind { none, fluctuation };

/// Initial two-particle correlators: none leaves them at zero, fluctuation
/// sets q11 = q22 = epsilon * p3.
struct SeedPolicy
{
    SeedKind kind = SeedKind::fluctuation;
    double epsilon = 1.0;

    bool operator==(const SeedPolicy&) const = default;
};

std::string to_string(SeedKind kind);
SeedKind seed_kind_from_string(const std::string& name);

CorrelatorState<double> initial_state(const SystemParams& params,
                                      const SeedPolicy& seed);

/// Rates entering the normalised equations, expressed in one time unit.
template <typename Scalar>
struct MeanFieldCoefficients
{
    Scalar n_atoms;
    Scalar gamma1, gamma2; ///< single-site rates
    Scalar pair1, pair2;   ///< mu_s * gamma_s, rate of every j != l term
    Scalar rabi;

    /// Physical time.
    static MeanFieldCoefficients physical(const SystemParams& p)
    {
        return {Scalar(static_cast<double>(p.n_atoms)), Scalar(p.gamma1),
                Scalar(p.gamma2), Scalar(p.mu1 * p.gamma1),
                Scalar(p.mu2 * p.gamma2), Scalar(p.rabi)};
    }

    /// Time measured in units of 1 / (mu1 gamma1 N).
    static MeanFieldCoefficients fast_scaled(const SystemParams& p)
    {
        const double unit = p.collective_rate1();
        return {Scalar(static_cast<double>(p.n_atoms)),
                Scalar(p.gamma1 / unit), Scalar(p.gamma2 / unit),
                Scalar(p.mu1 * p.gamma1 / unit),
                Scalar(p.mu2 * p.gamma2 / unit), Scalar(p.rabi / unit)};
    }
};

/// Layout of the normalised state vector: per-atom populations s_a = p_a/N,
/// per-atom coherence c = c12/N and per-pair correlators
/// A_xy = q_xy / (N(N-1)).
namespace slot {
constexpr Eigen::Index s1 = 0, s2 = 1, s3 = 2, c_re = 3, c_im = 4, a11 = 5,
                       a22 = 6, a12_re = 7, a12_im = 8;
constexpr Eigen::Index count = 9;
} // namespace slot

/// Closed mean-field equations on the normalised vector. See
/// docs/derivation.md for the term-by-term origin of every line.
template <typename Scalar, typename In, typename Out>
void meanfield_rhs_normalized(const MeanFieldCoefficients<Scalar>& k,
                              const Eigen::MatrixBase<In>& y,
                              Eigen::MatrixBase<Out>& dy)
{
    using C = std::complex<Scalar>;
    const Scalar s1 = y[slot::s1], s2 = y[slot::s2], s3 = y[slot::s3];
    const C c(y[slot::c_re], y[slot::c_im]);
    const Scalar a11 = y[slot::a11], a22 = y[slot::a22];
    const C a12(y[slot::a12_re], y[slot::a12_im]);

    const Scalar others = k.n_atoms - Scalar(1); // partners of one atom
    const Scalar thirds = k.n_atoms - Scalar(2); // spectators of one pair
    const Scalar decay = Scalar(2) * (k.gamma1 + k.gamma2);
    const Scalar om = k.rabi;

    const Scalar emit1 = Scalar(2) * k.gamma1 * s3 +
                         Scalar(2) * others * k.pair1 * a11;
    const Scalar emit2 = Scalar(2) * k.gamma2 * s3 +
                         Scalar(2) * others * k.pair2 * a22;
    const Scalar rabi_flow = Scalar(2) * om * c.imag();

    dy[slot::s1] = emit1 + rabi_flow;
    dy[slot::s2] = emit2 - rabi_flow;
    dy[slot::s3] = -emit1 - emit2;

    const C dc = C(0, om) * (s2 - s1) +
                 others * (k.pair1 + k.pair2) * std::conj(a12);
    dy[slot::c_re] = dc.real();
    dy[slot::c_im] = dc.imag();

    const Scalar inv1 = s3 - s1;
    const Scalar inv2 = s3 - s2;
    const Scalar cross = (a12 * c).real();

    dy[slot::a11] = -decay * a11 + Scalar(2) * k.pair1 * s3 * inv1 +
                    Scalar(2) * thirds * k.pair1 * inv1 * a11 -
                    Scalar(2) * thirds * k.pair2 * cross -
                    Scalar(2) * om * a12.imag();
    dy[slot::a22] = -decay * a22 + Scalar(2) * k.pair2 * s3 * inv2 +
                    Scalar(2) * thirds * k.pair2 * inv2 * a22 -
                    Scalar(2) * thirds * k.pair1 * cross +
                    Scalar(2) * om * a12.imag();

    const C da12 =
        -decay * a12 - (k.pair1 + k.pair2) * s3 * std::conj(c) +
        thirds * (k.pair1 * inv1 + k.pair2 * inv2) * a12 -
        thirds * std::conj(c) * (k.pair1 * a11 + k.pair2 * a22) +
        C(0, om) * (a11 - a22);
    dy[slot::a12_re] = da12.real();
    dy[slot::a12_im] = da12.imag();
}

template <typename Scalar>
Eigen::Matrix<Scalar, slot::count, 1>
to_normalized(const CorrelatorState<Scalar>& st, Scalar n)
{
    const Scalar pairs = n * (n - Scalar(1));
    Eigen::Matrix<Scalar, slot::count, 1> y;
    y << st.p1 / n, st.p2 / n, st.p3 / n, st.c12.real() / n,
        st.c12.imag() / n, st.q11 / pairs, st.q22 / pairs,
        st.q12.real() / pairs, st.q12.imag() / pairs;
    return y;
}

template <typename Scalar, typename In>
CorrelatorState<Scalar> from_normalized(const Eigen::MatrixBase<In>& y,
                                        Scalar n)
{
    const Scalar pairs = n * (n - Scalar(1));
    CorrelatorState<Scalar> st;
    st.p1 = y[slot::s1] * n;
    st.p2 = y[slot::s2] * n;
    st.p3 = y[slot::s3] * n;
    st.c12 = {y[slot::c_re] * n, y[slot::c_im] * n};
    st.q11 = y[slot::a11] * pairs;
    st.q22 = y[slot::a22] * pairs;
    st.q12 = {y[slot::a12_re] * pairs, y[slot::a12_im] * pairs};
    st.w12 = pairs * std::norm(std::complex<Scalar>(y[slot::c_re],
                                                    y[slot::c_im]));
    return st;
}

/// Time derivative of every collective variable in physical time. Requires
/// N >= 2 (the pair variables are undefined for a single atom).
template <typename Scalar = double>
CorrelatorState<Scalar> rhs(const CorrelatorState<Scalar>& state,
                            const SystemParams& params)
{
    params.validate();
    if (params.n_atoms < 2) {
        throw CapacityError("mean-field equations need N >= 2; use the exact "
                            "solver for a single atom");
    }
    const auto k = MeanFieldCoefficients<Scalar>::physical(params);
    const auto y = to_normalized(state, k.n_atoms);
    Eigen::Matrix<Scalar, slot::count, 1> dy;
    meanfield_rhs_normalized(k, y, dy);
    auto d = from_normalized<Scalar>(dy, k.n_atoms);
    // d/dt of the factorised w12 = N(N-1) |c|^2.
    const Scalar pairs = k.n_atoms * (k.n_atoms - Scalar(1));
    d.w12 = Scalar(2) * pairs *
            (y[slot::c_re] * dy[slot::c_re] + y[slot::c_im] * dy[slot::c_im]);
    return d;
}

struct Intensities
{
    double i1;
    double i2;
};

/// I1 = q11 / N^2, I2 = q22 / N^2.
Intensities intensities(const CorrelatorState<double>& state,
                        std::int64_t n_atoms);

enum class GridSpacing { linear, logarithmic };

struct SimulationOptions
{
    SeedPolicy seed{};
    std::size_t samples = 2001;
    GridSpacing spacing = GridSpacing::linear;
    /// Logarithmic grids start at t_end * log_start_fraction.
    double log_start_fraction = 1e-4;
    Method method = Method::automatic;
    /// Unit of t_end. slow_scaled needs gamma2 > 0.
    TimeUnit t_end_unit = TimeUnit::slow_scaled;
};

/// Integrates the closed equations from initial_state() to t_end.
///
/// Integration runs in fast-scaled time with normalised variables, and the
/// trajectory's primary axis is that fast-scaled time (it stays defined
/// when gamma2 = 0). Columns follow the CSV schema, so mu2 gamma2 N t is
/// always present as t_scaled_slow, followed by t_physical, re_q12_over_N2
/// and im_q12_over_N2. Rejects N < kMinMeanFieldAtoms with CapacityError.
Trajectory simulate(const SystemParams& params, double t_end,
                    const Tolerances& tol, const SimulationOptions& options = {});

} // namespace superlambda
