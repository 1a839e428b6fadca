#include <array>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles/cascade.hpp"

#include "superlambda/analysis.hpp"
#include "superlambda/exact.hpp"

using namespace superlambda;

namespace {

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    }
    return g;
}

SystemParams atoms(int n, double g1, double g2, double rabi)
{
    SystemParams p;
    p.n_atoms = n;
    p.gamma1 = g1;
    p.gamma2 = g2;
    p.rabi = rabi;
    p.initial_excited = n;
    return p;
}

double population(const DensityMatrix& rho, int level, int atom)
{
    return expectation(rho, OperatorSpec::population(level, atom)).real();
}

// Per-atom state with populations and a lower-doublet coherence.
Eigen::Matrix3cd site_state(double s1, double s2, double s3,
                            std::complex<double> c12)
{
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(0, 0) = s1;
    m(1, 1) = s2;
    m(2, 2) = s3;
    m(1, 0) = c12; // <S12> = rho_21
    m(0, 1) = std::conj(c12);
    return m;
}

} // namespace

TEST_CASE("site operators and dimensions")
{
    CHECK(hilbert_dim(1) == 3);
    CHECK(hilbert_dim(4) == 81);
    const auto s33 = collective_operator(2, site_basis(3, 3));
    const auto rho = DensityMatrix::fully_excited(2);
    CHECK(expectation(rho, s33).real() == doctest::Approx(2.0));
    const auto swap = atom_swap(3, 0, 2);
    CHECK((Eigen::MatrixXcd(swap * swap) -
           Eigen::MatrixXcd::Identity(27, 27))
              .norm() < 1e-15);
    CHECK_THROWS_AS(OperatorSpec::population(4).validate(2), ConfigError);
    CHECK_THROWS_AS(OperatorSpec::population(1, 3).validate(2), ConfigError);
}

TEST_CASE("exact solver refuses more than four atoms")
{
    const auto p = atoms(5, 1, 1, 0);
    CHECK_THROWS_AS(build_liouvillian(p, CouplingSet::dicke(p)),
                    CapacityError);
    CHECK_THROWS_AS(DensityMatrix::fully_excited(5), CapacityError);
}

TEST_CASE("single atom decays as exp[-2(g1+g2)t] and branches g1:g2")
{
    const auto p = atoms(1, 1.0, 0.25, 0.0);
    const auto l = build_liouvillian(p, CouplingSet::dicke(p));
    const auto grid = linspace(0.0, 10.0, 101);
    const auto states = evolve(DensityMatrix::fully_excited(1), l, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double p3 = population(states[i], 3, 0);
        const double ref = single_atom_decay(grid[i], 1.0, 0.25, 1.0);
        CHECK(std::abs(p3 - ref) <= 1e-9 * std::max(ref, 1e-12) + 1e-14);
        if (grid[i] > 0.5) {
            CHECK(population(states[i], 1, 0) / population(states[i], 2, 0) ==
                  doctest::Approx(4.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("driven lower doublet oscillates at 2 Omega")
{
    const double om = 0.7;
    const auto p = atoms(1, 1.0, 1.0, om);
    const auto l = build_liouvillian(p, CouplingSet::dicke(p));
    const auto grid = linspace(0.0, 12.0, 241);
    const std::array<int, 1> lv{1};
    const auto states = evolve(DensityMatrix::product_levels(lv), l, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ref = std::pow(std::cos(om * grid[i]), 2);
        CHECK(std::abs(population(states[i], 1, 0) - ref) <= 1e-9);
    }
}

TEST_CASE("two-atom cascade matches the closed form")
{
    const double g = 0.8;
    const auto p = atoms(2, g, 0.0, 0.0);
    const auto l = build_liouvillian(p, CouplingSet::dicke(p));
    const auto grid = linspace(0.0, 4.0, 81);
    const auto states = evolve(DensityMatrix::fully_excited(2), l, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s33 =
            expectation(states[i], OperatorSpec::population(3)).real();
        CHECK(std::abs(s33 - oracle::cascade_upper_population(g, grid[i])) <=
              1e-9);
    }
}

TEST_CASE("independent atoms factorise")
{
    const auto p = atoms(2, 1.0, 0.4, 0.3);
    const auto l2 = build_liouvillian(p, CouplingSet::independent(p));
    const auto p1 = atoms(1, 1.0, 0.4, 0.3);
    const auto l1 = build_liouvillian(p1, CouplingSet::dicke(p1));
    const auto grid = linspace(0.0, 5.0, 51);
    const auto pair = evolve(DensityMatrix::fully_excited(2), l2, grid);
    const auto one = evolve(DensityMatrix::fully_excited(1), l1, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double single3 = population(one[i], 3, 0);
        CHECK(expectation(pair[i], OperatorSpec::population(3)).real() ==
              doctest::Approx(2 * single3).epsilon(1e-9));
        for (int a = 1; a <= 3; ++a) {
            for (int b = 1; b <= 3; ++b) {
                const auto both =
                    expectation(pair[i], OperatorSpec::site_pair(a, a, 0, b, b, 1));
                CHECK(std::abs(both.real() - population(one[i], a, 0) *
                                                 population(one[i], b, 0)) <=
                      1e-10);
            }
        }
        const auto st = observe(pair[i]);
        CHECK(std::abs(st.q11) <= 1e-10);
        CHECK(std::abs(st.q22) <= 1e-10);
        CHECK(std::abs(st.q12) <= 1e-10);
    }
}

TEST_CASE("symmetric Bell state has unit pair correlator")
{
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(9);
    // |31> and |13>: digits (2,0) -> 6, (0,2) -> 2
    psi[6] = 1.0 / std::sqrt(2.0);
    psi[2] = 1.0 / std::sqrt(2.0);
    const DensityMatrix rho(2, psi * psi.adjoint());
    CHECK(expectation(rho, OperatorSpec::pair_correlator(3, 1)).real() ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(expectation(rho, OperatorSpec::population(3)).real() ==
          doctest::Approx(1.0).epsilon(1e-14));
    psi[2] = -psi[2];
    const DensityMatrix anti(2, psi * psi.adjoint());
    CHECK(expectation(anti, OperatorSpec::pair_correlator(3, 1)).real() ==
          doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("evolution preserves trace, hermiticity and positivity")
{
    const auto p = atoms(3, 1.0, 0.3, 0.9);
    const auto l = build_liouvillian(p, CouplingSet::dicke(p));
    const auto states =
        evolve(DensityMatrix::fully_excited(3), l, linspace(0.0, 3.0, 31));
    for (const auto& s : states) {
        const auto inv = s.invariants();
        CHECK(inv.trace_error <= 1e-10);
        CHECK(inv.hermiticity_error <= 1e-12);
        CHECK(inv.min_eigenvalue >= -1e-8);
    }
}

TEST_CASE("Dicke dynamics commute with atom permutations")
{
    const auto p = atoms(3, 1.0, 0.5, 0.6);
    const auto l = build_liouvillian(p, CouplingSet::dicke(p));
    const std::array<int, 3> lv{3, 1, 2};
    const auto rho0 = DensityMatrix::product_levels(lv);
    const Eigen::MatrixXcd swap = atom_swap(3, 0, 2);
    const DensityMatrix swapped(3, swap * rho0.matrix() * swap.adjoint());
    const auto grid = linspace(0.0, 2.0, 11);
    const auto a = evolve(rho0, l, grid);
    const auto b = evolve(swapped, l, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Eigen::MatrixXcd back = swap * a[i].matrix() * swap.adjoint();
        CHECK((back - b[i].matrix()).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("propagator and adaptive modes agree")
{
    const auto p = atoms(2, 1.0, 0.2, 0.5);
    const auto l = build_liouvillian(p, CouplingSet::dicke(p));
    const auto grid = linspace(0.0, 3.0, 31);
    EvolveOptions prop;
    prop.mode = PropagationMode::propagator;
    const auto a = evolve(DensityMatrix::fully_excited(2), l, grid);
    const auto b = evolve(DensityMatrix::fully_excited(2), l, grid, prop);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK((a[i].matrix() - b[i].matrix()).cwiseAbs().maxCoeff() <= 1e-9);
    }
    const auto p4 = atoms(4, 1.0, 0.2, 0.5);
    CHECK_THROWS_AS(evolve(DensityMatrix::fully_excited(4),
                           build_liouvillian(p4, CouplingSet::dicke(p4)), grid,
                           prop),
                    CapacityError);
}

TEST_CASE("a single atom has no pair cross terms")
{
    const auto p = atoms(1, 1.0, 0.5, 0.8);
    const auto l = build_liouvillian(p, CouplingSet::dicke(p));
    for (const auto& s :
         evolve(DensityMatrix::fully_excited(1), l, linspace(0.0, 2.0, 21))) {
        const auto d = dressed_expectations(s);
        CHECK(d.d_mm == 0.0);
        CHECK(d.d_pp == 0.0);
        CHECK(d.cross == std::complex<double>(0.0, 0.0));
    }
}

TEST_CASE("exact and closed derivatives agree on product states")
{
    // On a product state without optical coherence every three-body moment
    // factorises exactly, so the closure is exact at that instant.
    SystemParams p = atoms(2, 1.0, 0.35, 0.6);
    p.mu1 = 1.0;
    p.mu2 = 1.0;
    const auto l = build_liouvillian(p, CouplingSet::dicke(p));
    const std::array<Eigen::Matrix3cd, 2> sites{
        site_state(0.2, 0.1, 0.7, {0.05, 0.1}),
        site_state(0.2, 0.1, 0.7, {0.05, 0.1})};
    const auto rho = DensityMatrix::product(sites);
    const Eigen::MatrixXcd drho = l.derivative(rho);

    auto rate = [&](const SparseOperator& op) {
        return (Eigen::MatrixXcd(op) * drho).trace();
    };
    const auto st = observe(rho);
    const auto closed = rhs(st, p);

    CHECK(rate(collective_operator(2, site_basis(1, 1))).real() ==
          doctest::Approx(closed.p1).epsilon(1e-12));
    CHECK(rate(collective_operator(2, site_basis(2, 2))).real() ==
          doctest::Approx(closed.p2).epsilon(1e-12));
    CHECK(rate(collective_operator(2, site_basis(3, 3))).real() ==
          doctest::Approx(closed.p3).epsilon(1e-12));
    const auto dc = rate(collective_operator(2, site_basis(1, 2)));
    CHECK(std::abs(dc - closed.c12) <= 1e-12);
    const auto dq11 =
        rate(pair_sum_operator(2, site_basis(3, 1), site_basis(1, 3)));
    const auto dq22 =
        rate(pair_sum_operator(2, site_basis(3, 2), site_basis(2, 3)));
    const auto dq12 =
        rate(pair_sum_operator(2, site_basis(3, 1), site_basis(2, 3)));
    CHECK(std::abs(dq11 - closed.q11) <= 1e-12);
    CHECK(std::abs(dq22 - closed.q22) <= 1e-12);
    CHECK(std::abs(dq12 - closed.q12) <= 1e-12);

    // Finite-difference check of the same rates through evolve().
    const double h = 1e-4;
    const std::array<double, 3> g3{0.0, h, 2 * h};
    EvolveOptions tight;
    tight.tol = {1e-13, 1e-16};
    const auto s = evolve(rho, l, g3, tight);
    const auto q0 = observe(s[0]), q1 = observe(s[1]), q2 = observe(s[2]);
    const double fd11 = (-3 * q0.q11 + 4 * q1.q11 - q2.q11) / (2 * h);
    CHECK(fd11 == doctest::Approx(closed.q11).epsilon(1e-6));
    const double fd3 = (-3 * q0.p3 + 4 * q1.p3 - q2.p3) / (2 * h);
    CHECK(fd3 == doctest::Approx(closed.p3).epsilon(1e-6));
}

TEST_CASE("exact trajectory carries the mean-field column schema")
{
    const auto p = atoms(2, 1.0, 0.5, 0.3);
    const auto grid = linspace(0.0, 1.0, 11);
    const auto traj = exact_trajectory(p, CouplingSet::dicke(p),
                                       DensityMatrix::fully_excited(2), grid);
    for (const char* c : {"t_scaled_slow", "t_scaled_fast", "p1_over_N",
                          "p2_over_N", "p3_over_N", "I1", "I2", "d_mm", "d_pp",
                          "re_cross", "im_cross"}) {
        CHECK(traj.has_column(c));
    }
    for (Eigen::Index i = 0; i < traj.size(); ++i) {
        const double total = traj.column("p1_over_N")[i] +
                             traj.column("p2_over_N")[i] +
                             traj.column("p3_over_N")[i];
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
}
