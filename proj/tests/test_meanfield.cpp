#include <random>

#include "doctest.h"
#include "oracles/closure_oracle.hpp"
#include "oracles/dicke_two_level.hpp"

#include "superlambda/meanfield.hpp"

using namespace superlambda;

namespace {

Eigen::Matrix<double, 9, 1> random_state(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_real_distribution<double> p(0.05, 1.0);
    Eigen::Matrix<double, 9, 1> y;
    const double a = p(rng), b = p(rng), c = p(rng);
    const double s = a + b + c;
    y << a / s, b / s, c / s, u(rng) * 0.3, u(rng) * 0.3, std::abs(u(rng)),
        std::abs(u(rng)), u(rng), u(rng);
    return y;
}

SystemParams lambda_params()
{
    SystemParams p;
    p.n_atoms = 1000;
    p.gamma1 = 1.0;
    p.gamma2 = 0.3;
    p.mu1 = 0.02;
    p.mu2 = 0.07;
    p.rabi = 0.8;
    return p;
}

} // namespace

TEST_CASE("closed equations match the mechanically derived closure")
{
    std::mt19937_64 rng(12345);
    for (const double n : {10.0, 1000.0, 1e7}) {
        SystemParams p = lambda_params();
        p.n_atoms = static_cast<std::int64_t>(n);
        const auto k = MeanFieldCoefficients<double>::physical(p);
        const oracle::Rates rates{n, k.gamma1, k.gamma2, k.pair1, k.pair2,
                                  k.rabi};
        for (int trial = 0; trial < 20; ++trial) {
            const auto y = random_state(rng);
            Eigen::Matrix<double, 9, 1> dy;
            meanfield_rhs_normalized(k, y, dy);
            const oracle::SymmetricState st{
                y[0], y[1], y[2], {y[3], y[4]}, y[5], y[6], {y[7], y[8]}};
            const auto ref = oracle::closed_rhs(rates, st);
            double scale = 0.0;
            for (double v : ref) {
                scale = std::max(scale, std::abs(v));
            }
            for (int i = 0; i < 9; ++i) {
                INFO("N=" << n << " slot " << i);
                CHECK(std::abs(dy[i] - ref[static_cast<std::size_t>(i)]) <=
                      1e-12 * scale);
            }
        }
    }
}

TEST_CASE("populations are conserved by the closed equations")
{
    std::mt19937_64 rng(7);
    const auto k = MeanFieldCoefficients<double>::physical(lambda_params());
    for (int trial = 0; trial < 50; ++trial) {
        const auto y = random_state(rng);
        Eigen::Matrix<double, 9, 1> dy;
        meanfield_rhs_normalized(k, y, dy);
        CHECK(std::abs(dy[0] + dy[1] + dy[2]) <=
              1e-14 * dy.head<3>().cwiseAbs().maxCoeff());
    }
}

TEST_CASE("collective rhs agrees with the normalised equations")
{
    SystemParams p = lambda_params();
    CorrelatorState<double> st;
    st.p1 = 200;
    st.p2 = 100;
    st.p3 = 700;
    st.c12 = {3.0, -4.0};
    st.q11 = 2e4;
    st.q22 = 5e3;
    st.q12 = {1e3, 2e2};
    const auto d = rhs(st, p);
    const double n = 1000.0;
    const auto k = MeanFieldCoefficients<double>::physical(p);
    const auto y = to_normalized(st, n);
    Eigen::Matrix<double, 9, 1> dy;
    meanfield_rhs_normalized(k, y, dy);
    CHECK(d.p3 == doctest::Approx(dy[2] * n).epsilon(1e-14));
    CHECK(d.q11 == doctest::Approx(dy[5] * n * (n - 1)).epsilon(1e-14));
    CHECK(d.p1 + d.p2 + d.p3 == doctest::Approx(0.0).scale(1e-9));
}

TEST_CASE("swapping channel labels swaps the equations")
{
    // Omega flips sign under 1 <-> 2 because c12 -> c21 = conj(c12).
    std::mt19937_64 rng(99);
    SystemParams p = lambda_params();
    SystemParams q = p;
    std::swap(q.gamma1, q.gamma2);
    std::swap(q.mu1, q.mu2);
    const auto kp = MeanFieldCoefficients<double>::physical(p);
    const auto kq = MeanFieldCoefficients<double>::physical(q);
    for (int trial = 0; trial < 20; ++trial) {
        const auto y = random_state(rng);
        Eigen::Matrix<double, 9, 1> ys;
        // c -> conj(c), A12 = <S31 S23> -> <S32 S13> = conj(A12)
        ys << y[1], y[0], y[2], y[3], -y[4], y[6], y[5], y[7], -y[8];
        Eigen::Matrix<double, 9, 1> dy, dys;
        meanfield_rhs_normalized(kp, y, dy);
        meanfield_rhs_normalized(kq, ys, dys);
        const double tol = 1e-13 * dy.cwiseAbs().maxCoeff();
        CHECK(std::abs(dys[0] - dy[1]) <= tol);
        CHECK(std::abs(dys[1] - dy[0]) <= tol);
        CHECK(std::abs(dys[2] - dy[2]) <= tol);
        CHECK(std::abs(dys[3] - dy[3]) <= tol);
        CHECK(std::abs(dys[4] + dy[4]) <= tol);
        CHECK(std::abs(dys[5] - dy[6]) <= tol);
        CHECK(std::abs(dys[6] - dy[5]) <= tol);
        CHECK(std::abs(dys[7] - dy[7]) <= tol);
        CHECK(std::abs(dys[8] + dy[8]) <= tol);
    }
}

TEST_CASE("gamma2 = 0 and Omega = 0 reduce to the two-level equations")
{
    SystemParams p;
    p.n_atoms = 5000;
    p.gamma1 = 1.0;
    p.gamma2 = 0.0;
    p.mu1 = 0.01;
    p.mu2 = 1.0;
    p.rabi = 0.0;
    const auto k = MeanFieldCoefficients<double>::physical(p);
    Eigen::Matrix<double, 9, 1> y;
    y << 0.3, 0.0, 0.7, 0.0, 0.0, 0.02, 0.0, 0.0, 0.0;
    Eigen::Matrix<double, 9, 1> dy;
    meanfield_rhs_normalized(k, y, dy);
    const double n = 5000, g = 1.0, kk = 0.01;
    const double z = y[2] - y[0], c = y[5];
    CHECK(2 * dy[2] == doctest::Approx(-2 * g * (1 + z) - 4 * (n - 1) * kk * c)
                           .epsilon(1e-14));
    CHECK(dy[5] == doctest::Approx(-2 * g * c + kk * z * (1 + z) +
                                   2 * (n - 2) * kk * z * c)
                       .epsilon(1e-14));
    for (int i : {1, 3, 4, 6, 7, 8}) {
        CHECK(dy[i] == 0.0);
    }
}

TEST_CASE("simulation agrees with an independent two-level reference")
{
    SystemParams p;
    p.n_atoms = 100000;
    p.gamma1 = 1.0;
    p.gamma2 = 0.0;
    p.mu1 = 0.01;
    p.rabi = 0.0;
    p.initial_excited = 100000;
    SimulationOptions opt;
    opt.samples = 301;
    opt.t_end_unit = TimeUnit::fast_scaled;
    const auto traj = simulate(p, 30.0, {1e-12, 1e-16}, opt);

    // Fast unit 1/(mu g N) = 1e-3; RK4 with h = 1e-6 physical, 100 steps
    // per output sample of 0.1 fast units.
    const oracle::TwoLevelDicke ref(1e5, 1.0, 0.01);
    const double c0 = 1.0 / (1e5 - 1); // fluctuation seed q11 = N
    const auto samples = ref.run(1e-6, 30000, 100, c0);
    REQUIRE(samples.size() == 301);
    const auto& s3 = traj.column("p3_over_N");
    const auto& i1 = traj.column("I1");
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        worst = std::max(worst, std::abs(s3[ii] - samples[i].excited) /
                                    samples[i].excited);
        const double i1_ref = samples[i].corr * (1e5 - 1) / 1e5;
        CHECK(std::abs(i1[ii] - i1_ref) <= 1e-8 * std::max(i1_ref, 1e-6));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("mean-field simulation refuses tiny ensembles")
{
    SystemParams p;
    p.n_atoms = 1;
    CHECK_THROWS_AS(simulate(p, 1.0, {}), CapacityError);
    p.n_atoms = 9;
    CHECK_THROWS_AS(simulate(p, 1.0, {}), CapacityError);
    CorrelatorState<double> st;
    st.p3 = 1;
    p.n_atoms = 1;
    CHECK_THROWS_AS(rhs(st, p), CapacityError);
}

TEST_CASE("seed policies")
{
    SystemParams p;
    p.n_atoms = 1000;
    p.initial_excited = 800;
    const auto none = initial_state(p, {SeedKind::none, 1.0});
    CHECK(none.q11 == 0.0);
    CHECK(none.p3 == 800);
    CHECK(none.p1 == 200);
    const auto fl = initial_state(p, {SeedKind::fluctuation, 0.5});
    CHECK(fl.q11 == 400);
    CHECK(fl.q22 == 400);
    CHECK(seed_kind_from_string(to_string(SeedKind::fluctuation)) ==
          SeedKind::fluctuation);
    CHECK_THROWS_AS(seed_kind_from_string("bogus"), ConfigError);
}

TEST_CASE("slow-unit end time needs gamma2 > 0")
{
    SystemParams p;
    p.n_atoms = 100;
    p.gamma2 = 0.0;
    CHECK_THROWS_AS(simulate(p, 1.0, {}), ConfigError);
}
