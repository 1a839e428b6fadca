#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "superlambda/errors.hpp"

namespace superlambda {

struct Tolerances
{
    double rel = 1e-8;
    double abs = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-14;

    void validate() const
    {
        if (!(rel > 0.0 && rel < 1.0)) {
            throw ConfigError("tolerance: rel must lie in (0, 1)");
        }
        if (!(abs > 0.0)) {
            throw ConfigError("tolerance: abs must be > 0");
        }
        if (!(min_step > 0.0 && min_step < max_step)) {
            throw ConfigError("tolerance: need 0 < min_step < max_step");
        }
    }

    bool operator==(const Tolerances&) const = default;
};

enum class Method { explicit_rk, stiff, automatic };

struct SolverStats
{
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    std::size_t jacobian_evals = 0;
    std::size_t factorizations = 0;
    bool stiff_engaged = false;
    double stiff_engaged_at = std::numeric_limits<double>::quiet_NaN();
};

template <typename Scalar>
using StateVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using JacobianMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// dy/dt = rhs(t, y). `jacobian` is optional; when absent the stiff mode
/// builds one by forward differences (complex systems are assumed
/// complex-linear in y). `abs_scale`, when non-empty, multiplies the absolute
/// tolerance per component.
template <typename Scalar>
struct OdeProblem
{
    std::function<void(double, const StateVector<Scalar>&,
                       StateVector<Scalar>&)>
        rhs;
    std::function<void(double, const StateVector<Scalar>&,
                       JacobianMatrix<Scalar>&)>
        jacobian;
    Eigen::VectorXd abs_scale;
    bool autonomous = false;
};

template <typename Scalar>
struct OdeSolution
{
    std::vector<double> times;
    std::vector<StateVector<Scalar>> states;
    SolverStats stats;
};

namespace detail {

template <typename Scalar>
std::vector<double> flatten(const StateVector<Scalar>& y)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(y.size()) * 2);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if constexpr (std::is_same_v<Scalar, std::complex<double>>) {
            out.push_back(y[i].real());
            out.push_back(y[i].imag());
        } else {
            out.push_back(static_cast<double>(y[i]));
        }
    }
    return out;
}

template <typename Scalar>
class Stepper
{
public:
    using Vec = StateVector<Scalar>;
    using Mat = JacobianMatrix<Scalar>;

    Stepper(const OdeProblem<Scalar>& problem, const Tolerances& tol,
            Method method, Eigen::Index n)
        : problem_(problem), tol_(tol), stiff_(method == Method::stiff),
          automatic_(method == Method::automatic)
    {
        atol_ = Eigen::VectorXd::Constant(n, tol.abs);
        if (problem.abs_scale.size() == n) {
            atol_ = atol_.cwiseProduct(problem.abs_scale);
        }
        for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_,
                        &ynew_, &err_}) {
            k->resize(n);
        }
    }

    SolverStats stats;

    void eval(double t, const Vec& y, Vec& dy)
    {
        problem_.rhs(t, y, dy);
        ++stats.rhs_evals;
    }

    double error_norm(const Vec& y, const Vec& ynew, const Vec& err) const
    {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc =
                atol_[i] +
                tol_.rel * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = std::abs(err[i]) / sc;
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(
                                  y.size(), 1)));
    }

    double initial_step(double t, const Vec& y, const Vec& f0, double span)
    {
        double d0 = 0.0, d1 = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = atol_[i] + tol_.rel * std::abs(y[i]);
            d0 += std::norm(y[i]) / (sc * sc);
            d1 += std::norm(f0[i]) / (sc * sc);
        }
        const double n = static_cast<double>(std::max<Eigen::Index>(
            y.size(), 1));
        d0 = std::sqrt(d0 / n);
        d1 = std::sqrt(d1 / n);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        Vec y1 = y + Scalar(h0) * f0;
        Vec f1(y.size());
        eval(t + h0, y1, f1);
        double d2 = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = atol_[i] + tol_.rel * std::abs(y[i]);
            d2 += std::norm(f1[i] - f0[i]) / (sc * sc);
        }
        d2 = std::sqrt(d2 / n) / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = dmax <= 1e-15
                              ? std::max(1e-6, h0 * 1e-3)
                              : std::pow(0.01 / dmax, 1.0 / 5.0);
        return std::min({100.0 * h0, h1, span, tol_.max_step});
    }

    /// Attempts one step of size h from (t, y). Returns the scaled error;
    /// on success (<= 1) ynew_ holds the new state and fsal_ its derivative.
    double attempt(double t, const Vec& y, const Vec& f, double h)
    {
        return stiff_ ? attempt_rosenbrock(t, y, f, h)
                      : attempt_dopri(t, y, f, h);
    }

    bool stiff() const { return stiff_; }
    bool automatic() const { return automatic_; }

    void engage_stiff(double t)
    {
        stiff_ = true;
        stats.stiff_engaged = true;
        stats.stiff_engaged_at = t;
    }

    /// Stiffness test after an accepted explicit step (Hairer's h*lambda
    /// estimate); returns true once the problem looks persistently stiff.
    bool looks_stiff(double h)
    {
        if (stiff_ || !automatic_) {
            return false;
        }
        const double num = (k7_ - k6_).norm();
        const double den = (ynew_ - stage6_).norm();
        const double hl = den > 0.0 ? h * num / den : 0.0;
        if (hl > 3.25) {
            ++stiff_hits_;
            nonstiff_hits_ = 0;
        } else if (++nonstiff_hits_ >= 6) {
            stiff_hits_ = 0;
        }
        return stiff_hits_ >= 15;
    }

    double order() const { return stiff_ ? 4.0 : 5.0; }

    const Vec& new_state() const { return ynew_; }
    const Vec& new_derivative() const { return stiff_ ? fnew_ : k7_; }

private:
    double attempt_dopri(double t, const Vec& y, const Vec& f, double h)
    {
        const Scalar hs(h);
        k1_ = f;
        tmp_ = y + hs * (Scalar(1.0 / 5) * k1_);
        eval(t + h / 5, tmp_, k2_);
        tmp_ = y + hs * (Scalar(3.0 / 40) * k1_ + Scalar(9.0 / 40) * k2_);
        eval(t + 3 * h / 10, tmp_, k3_);
        tmp_ = y + hs * (Scalar(44.0 / 45) * k1_ - Scalar(56.0 / 15) * k2_ +
                         Scalar(32.0 / 9) * k3_);
        eval(t + 4 * h / 5, tmp_, k4_);
        tmp_ = y + hs * (Scalar(19372.0 / 6561) * k1_ -
                         Scalar(25360.0 / 2187) * k2_ +
                         Scalar(64448.0 / 6561) * k3_ -
                         Scalar(212.0 / 729) * k4_);
        eval(t + 8 * h / 9, tmp_, k5_);
        stage6_ = y + hs * (Scalar(9017.0 / 3168) * k1_ -
                            Scalar(355.0 / 33) * k2_ +
                            Scalar(46732.0 / 5247) * k3_ +
                            Scalar(49.0 / 176) * k4_ -
                            Scalar(5103.0 / 18656) * k5_);
        eval(t + h, stage6_, k6_);
        ynew_ = y + hs * (Scalar(35.0 / 384) * k1_ +
                          Scalar(500.0 / 1113) * k3_ +
                          Scalar(125.0 / 192) * k4_ -
                          Scalar(2187.0 / 6784) * k5_ +
                          Scalar(11.0 / 84) * k6_);
        eval(t + h, ynew_, k7_);
        err_ = hs * (Scalar(71.0 / 57600) * k1_ -
                     Scalar(71.0 / 16695) * k3_ +
                     Scalar(71.0 / 1920) * k4_ -
                     Scalar(17253.0 / 339200) * k5_ +
                     Scalar(22.0 / 525) * k6_ - Scalar(1.0 / 40) * k7_);
        return error_norm(y, ynew_, err_);
    }

    void jacobian(double t, const Vec& y, const Vec& f)
    {
        const Eigen::Index n = y.size();
        jac_.resize(n, n);
        if (problem_.jacobian) {
            problem_.jacobian(t, y, jac_);
        } else {
            Vec yp = y;
            Vec fp(n);
            const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
            for (Eigen::Index j = 0; j < n; ++j) {
                const double delta =
                    eps * std::max({std::abs(y[j]), atol_[j] / tol_.rel, 1e-8});
                yp[j] = y[j] + Scalar(delta);
                eval(t, yp, fp);
                jac_.col(j) = (fp - f) / Scalar(delta);
                yp[j] = y[j];
            }
        }
        ++stats.jacobian_evals;
        dfdt_.setZero(n);
        if (!problem_.autonomous) {
            const double dt =
                std::sqrt(std::numeric_limits<double>::epsilon()) *
                std::max(std::abs(t), 1.0);
            Vec ft(n);
            eval(t + dt, y, ft);
            dfdt_ = (ft - f) / Scalar(dt);
        }
    }

    // Shampine's L-stable 4(3) Rosenbrock parameter set (Kaps-Rentrop form).
    double attempt_rosenbrock(double t, const Vec& y, const Vec& f, double h)
    {
        constexpr double gam = 0.5, a21 = 2.0, a31 = 48.0 / 25,
                         a32 = 6.0 / 25, c21 = -8.0, c31 = 372.0 / 25,
                         c32 = 12.0 / 5, c41 = -112.0 / 125,
                         c42 = -54.0 / 125, c43 = -2.0 / 5, b1 = 19.0 / 9,
                         b2 = 0.5, b3 = 25.0 / 108, b4 = 125.0 / 108,
                         e1 = 17.0 / 54, e2 = 7.0 / 36, e4 = 125.0 / 108,
                         c1x = 0.5, c2x = -1.5, c3x = 121.0 / 50,
                         c4x = 29.0 / 250, a2x = 1.0, a3x = 3.0 / 5;
        if (!jacobian_fresh_) {
            jacobian(t, y, f);
            jacobian_fresh_ = true;
        }
        const Eigen::Index n = y.size();
        Mat a = -jac_;
        a.diagonal().array() += Scalar(1.0 / (gam * h));
        Eigen::PartialPivLU<Mat> lu(a);
        ++stats.factorizations;
        const Scalar hs(h);

        Vec g1 = lu.solve(Vec(f + hs * Scalar(c1x) * dfdt_));
        tmp_ = y + Scalar(a21) * g1;
        eval(t + a2x * h, tmp_, k2_);
        Vec g2 = lu.solve(
            Vec(k2_ + hs * Scalar(c2x) * dfdt_ + Scalar(c21 / h) * g1));
        tmp_ = y + Scalar(a31) * g1 + Scalar(a32) * g2;
        eval(t + a3x * h, tmp_, k3_);
        Vec g3 = lu.solve(Vec(k3_ + hs * Scalar(c3x) * dfdt_ +
                              (Scalar(c31) * g1 + Scalar(c32) * g2) /
                                  hs));
        Vec g4 = lu.solve(Vec(k3_ + hs * Scalar(c4x) * dfdt_ +
                              (Scalar(c41) * g1 + Scalar(c42) * g2 +
                               Scalar(c43) * g3) /
                                  hs));
        ynew_ = y + Scalar(b1) * g1 + Scalar(b2) * g2 + Scalar(b3) * g3 +
                Scalar(b4) * g4;
        err_ = Scalar(e1) * g1 + Scalar(e2) * g2 + Scalar(e4) * g4;
        const double e = error_norm(y, ynew_, err_);
        if (e <= 1.0) {
            fnew_.resize(n);
            eval(t + h, ynew_, fnew_);
            jacobian_fresh_ = false;
        }
        return e;
    }

    const OdeProblem<Scalar>& problem_;
    Tolerances tol_;
    bool stiff_;
    bool automatic_;
    bool jacobian_fresh_ = false;
    int stiff_hits_ = 0;
    int nonstiff_hits_ = 0;
    Eigen::VectorXd atol_;
    Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_, err_, stage6_, fnew_,
        dfdt_;
    Mat jac_;
};

} // namespace detail

/// Adaptive integration of y' = f(t, y) from grid.front() to grid.back(),
/// sampled at every grid point (steps are clamped to land on them).
///
/// Explicit mode is Dormand-Prince 5(4). Stiff mode is a 4th-order
/// Rosenbrock method with a fresh Jacobian per step. Automatic mode starts
/// explicit and switches to stiff when the stiffness test fires or the step
/// size collapses below min_step.
template <typename Scalar>
OdeSolution<Scalar> integrate(const OdeProblem<Scalar>& problem,
                              const StateVector<Scalar>& y0,
                              std::span<const double> grid,
                              const Tolerances& tol,
                              Method method = Method::automatic)
{
    tol.validate();
    if (grid.empty()) {
        throw ConfigError("integrate: empty output grid");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw ConfigError("integrate: output grid must be increasing");
        }
    }

    using Vec = StateVector<Scalar>;
    OdeSolution<Scalar> out;
    out.times.assign(grid.begin(), grid.end());
    out.states.reserve(grid.size());
    out.states.push_back(y0);

    detail::Stepper<Scalar> stepper(problem, tol, method, y0.size());
    double t = grid.front();
    Vec y = y0;
    Vec f(y.size());
    stepper.eval(t, y, f);
    if (!f.allFinite()) {
        throw IntegrationError("integrate: non-finite right-hand side at t0",
                               t, detail::flatten(y));
    }
    if (grid.size() == 1) {
        out.stats = stepper.stats;
        return out;
    }

    const double span = grid.back() - grid.front();
    double h = stepper.initial_step(t, y, f, span);
    int consecutive_failures = 0;

    for (std::size_t target_index = 1; target_index < grid.size();
         ++target_index) {
        const double target = grid[target_index];
        while (t < target) {
            const double remaining = target - t;
            double h_try = std::min(h, tol.max_step);
            bool clamped = false;
            if (h_try >= remaining ||
                remaining - h_try <= 1e-12 * std::max(1.0, std::abs(target))) {
                h_try = remaining;
                clamped = true;
            }
            const double floor =
                std::max(tol.min_step,
                         16 * std::numeric_limits<double>::epsilon() *
                             std::abs(t));
            if (h_try < floor && !clamped) {
                if (stepper.automatic() && !stepper.stiff()) {
                    stepper.engage_stiff(t);
                    h = std::max(h, 1e3 * floor);
                    continue;
                }
                throw IntegrationError("integrate: step size underflow at t = " +
                                           std::to_string(t),
                                       t, detail::flatten(y));
            }

            const double err = stepper.attempt(t, y, f, h_try);
            if (err <= 1.0 && std::isfinite(err)) {
                const bool check_stiff = stepper.looks_stiff(h_try);
                t = clamped ? target : t + h_try;
                y = stepper.new_state();
                f = stepper.new_derivative();
                ++stepper.stats.accepted;
                consecutive_failures = 0;
                const double p = stepper.order();
                const double fac =
                    err == 0.0 ? 5.0
                               : std::clamp(0.9 * std::pow(err, -1.0 / p),
                                            0.2, 5.0);
                const double h_next = h_try * fac;
                h = clamped ? std::max(h_next, h) : h_next;
                if (check_stiff) {
                    stepper.engage_stiff(t);
                }
                if (!f.allFinite()) {
                    throw IntegrationError(
                        "integrate: non-finite right-hand side", t,
                        detail::flatten(y));
                }
            } else {
                ++stepper.stats.rejected;
                if (++consecutive_failures > 60) {
                    throw IntegrationError(
                        "integrate: repeated step failures at t = " +
                            std::to_string(t),
                        t, detail::flatten(y));
                }
                const double p = stepper.order();
                const double fac =
                    std::isfinite(err)
                        ? std::clamp(0.9 * std::pow(err, -1.0 / p), 0.1, 0.5)
                        : 0.1;
                h = h_try * fac;
            }
        }
        out.states.push_back(y);
    }
    out.stats = stepper.stats;
    return out;
}

/// A local maximum of a sampled series.
struct Peak
{
    std::size_t index;
    double time;
    double value;
    double prominence;
};

/// Local maxima whose topographic prominence exceeds
/// `floor_fraction * max|series|`, ordered by time. Flat tops report their
/// central sample.
std::vector<Peak> find_peaks(std::span<const double> times,
                             std::span<const double> values,
                             double floor_fraction = 0.05);

} // namespace superlambda
