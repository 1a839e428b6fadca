#include "superlambda/meanfield.hpp"

#include <cmath>
#include <vector>

#include "superlambda/analysis.hpp"
#include "superlambda/serialize.hpp"

namespace superlambda {

std::string to_string(SeedKind kind)
{
    switch (kind) {
    case SeedKind::none: return "none";
    case SeedKind::fluctuation: return "fluctuation";
    }
    return "unknown";
}

SeedKind seed_kind_from_string(const std::string& name)
{
    if (name == "none") {
        return SeedKind::none;
    }
    if (name == "fluctuation") {
        return SeedKind::fluctuation;
    }
    throw ConfigError("unknown seed policy '" + name +
                      "' (expected none or fluctuation)");
}

CorrelatorState<double> initial_state(const SystemParams& params,
                                      const SeedPolicy& seed)
{
    params.validate();
    if (!(seed.epsilon >= 0.0)) {
        throw ConfigError("seed epsilon must be >= 0");
    }
    CorrelatorState<double> st;
    st.p3 = params.initial_excited;
    st.p1 = static_cast<double>(params.n_atoms) - params.initial_excited;
    if (seed.kind == SeedKind::fluctuation) {
        st.q11 = seed.epsilon * st.p3;
        st.q22 = seed.epsilon * st.p3;
    }
    return st;
}

Intensities intensities(const CorrelatorState<double>& state,
                        std::int64_t n_atoms)
{
    const double n2 = static_cast<double>(n_atoms) * static_cast<double>(n_atoms);
    return {state.q11 / n2, state.q22 / n2};
}

namespace {

std::vector<double> make_grid(double t_end, const SimulationOptions& opt)
{
    if (opt.samples < 2) {
        throw ConfigError("simulate: need at least 2 samples");
    }
    std::vector<double> grid(opt.samples);
    const double last = static_cast<double>(opt.samples - 1);
    if (opt.spacing == GridSpacing::linear) {
        for (std::size_t i = 0; i < opt.samples; ++i) {
            grid[i] = t_end * static_cast<double>(i) / last;
        }
    } else {
        if (!(opt.log_start_fraction > 0.0 && opt.log_start_fraction < 1.0)) {
            throw ConfigError("simulate: log_start_fraction must lie in (0, 1)");
        }
        // t = 0 first, then samples-1 log-spaced points ending at t_end.
        const double lo = std::log(t_end * opt.log_start_fraction);
        const double hi = std::log(t_end);
        grid[0] = 0.0;
        for (std::size_t i = 1; i < opt.samples; ++i) {
            const double f = opt.samples == 2
                                 ? 1.0
                                 : static_cast<double>(i - 1) / (last - 1.0);
            grid[i] = std::exp(lo + f * (hi - lo));
        }
        grid.back() = t_end;
    }
    return grid;
}

} // namespace

Trajectory simulate(const SystemParams& params, double t_end,
                    const Tolerances& tol, const SimulationOptions& options)
{
    params.validate();
    tol.validate();
    if (params.n_atoms < kMinMeanFieldAtoms) {
        throw CapacityError("mean-field closure requires N >= " +
                            std::to_string(kMinMeanFieldAtoms) +
                            " (N >> 1); use the exact solver for N <= 4");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw ConfigError("simulate: t_end must be > 0");
    }
    const ScaledParams scaled = nondimensionalize(params);
    // fast = slow * t_slow / t_fast = slow / (r_gamma r_mu)
    double t_end_fast = t_end;
    switch (options.t_end_unit) {
    case TimeUnit::fast_scaled: break;
    case TimeUnit::slow_scaled:
        if (!(params.gamma2 > 0.0)) {
            throw ConfigError("slow-scaled time is undefined for gamma2 = 0; "
                              "give t_end in fast units");
        }
        t_end_fast = t_end / (scaled.r_gamma * scaled.r_mu);
        break;
    case TimeUnit::physical: t_end_fast = t_end / scaled.t_fast; break;
    }

    const auto k = MeanFieldCoefficients<double>::fast_scaled(params);
    const double n = static_cast<double>(params.n_atoms);

    OdeProblem<double> problem;
    problem.rhs = [k](double, const StateVector<double>& y,
                      StateVector<double>& dy) {
        meanfield_rhs_normalized(k, y, dy);
    };
    problem.autonomous = true;

    const auto grid = make_grid(t_end_fast, options);
    const auto y0 = StateVector<double>(
        to_normalized(initial_state(params, options.seed), n));
    const auto sol = integrate(problem, y0, grid, tol, options.method);

    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd t_fast = Eigen::Map<const Eigen::VectorXd>(grid.data(), m);
    Trajectory traj(t_fast, TimeUnit::fast_scaled);

    Eigen::MatrixXd ys(m, slot::count);
    for (Eigen::Index i = 0; i < m; ++i) {
        ys.row(i) = sol.states[static_cast<std::size_t>(i)].transpose();
    }
    // Pair-normalised A_xy -> intensity units q_xy / N^2.
    const double pair_to_n2 = (n - 1.0) / n;
    Eigen::VectorXd d_mm(m), d_pp(m), re_cross(m), im_cross(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const BareCorrelators bare{
            ys(i, slot::a11) * pair_to_n2, ys(i, slot::a22) * pair_to_n2,
            {ys(i, slot::a12_re) * pair_to_n2, ys(i, slot::a12_im) * pair_to_n2}};
        // Intensity units: raw dressed sums divided by 2 N^2.
        const auto dd = dressed_transform(bare).scaled(0.5);
        d_mm[i] = dd.d_mm;
        d_pp[i] = dd.d_pp;
        re_cross[i] = dd.cross.real();
        im_cross[i] = dd.cross.imag();
    }

    traj.add_column("t_scaled_slow",
                    t_fast * (scaled.r_gamma * scaled.r_mu));
    traj.add_column("t_scaled_fast", t_fast);
    traj.add_column("p1_over_N", ys.col(slot::s1));
    traj.add_column("p2_over_N", ys.col(slot::s2));
    traj.add_column("p3_over_N", ys.col(slot::s3));
    traj.add_column("re_c12_over_N", ys.col(slot::c_re));
    traj.add_column("im_c12_over_N", ys.col(slot::c_im));
    traj.add_column("I1", ys.col(slot::a11) * pair_to_n2);
    traj.add_column("I2", ys.col(slot::a22) * pair_to_n2);
    traj.add_column("d_mm", d_mm);
    traj.add_column("d_pp", d_pp);
    traj.add_column("re_cross", re_cross);
    traj.add_column("im_cross", im_cross);
    traj.add_column("t_physical", t_fast * scaled.t_fast);
    traj.add_column("re_q12_over_N2", ys.col(slot::a12_re) * pair_to_n2);
    traj.add_column("im_q12_over_N2", ys.col(slot::a12_im) * pair_to_n2);

    auto& meta = traj.metadata();
    meta["engine"] = "meanfield";
    meta["params"] = params;
    meta["scaled"] = scaled;
    meta["seed"] = options.seed;
    meta["tolerances"] = tol;
    meta["method"] = to_string(options.method);
    meta["solver_stats"] = sol.stats;
    meta["time_unit"] = std::string(to_string(traj.unit()));
    return traj;
}

} // namespace superlambda
