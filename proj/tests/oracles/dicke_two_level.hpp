#pragma once

// Two-level superradiance reference in physical time, written in inversion
// variables and stepped with classical fixed-step RK4. Shares no code with
// the engine.
//
//   z = n_e - n_g per atom, C = <sigma+^a sigma-^b> per ordered pair
//   dz/dt = -2 g (1 + z) - 4 (N - 1) k C
//   dC/dt = -2 g C + k z (1 + z) + 2 (N - 2) k z C
//
// g is the single-atom rate, k = mu g the pair rate.

#include <array>
#include <vector>

namespace oracle {

struct TwoLevelSample
{
    double t;
    double excited; ///< n_e per atom
    double corr;    ///< C per pair
};

class TwoLevelDicke
{
public:
    TwoLevelDicke(double n_atoms, double gamma, double mu)
        : n_(n_atoms), g_(gamma), k_(mu * gamma)
    {
    }

    /// Samples every `stride` steps of size h, starting fully excited with
    /// C(0) = c0.
    std::vector<TwoLevelSample> run(double h, int steps, int stride,
                                    double c0) const
    {
        std::array<double, 2> y{1.0, c0};
        std::vector<TwoLevelSample> out;
        out.push_back(sample(0.0, y));
        for (int i = 1; i <= steps; ++i) {
            const auto k1 = f(y);
            const auto k2 = f(add(y, k1, h / 2));
            const auto k3 = f(add(y, k2, h / 2));
            const auto k4 = f(add(y, k3, h));
            for (int c = 0; c < 2; ++c) {
                y[c] += h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
            }
            if (i % stride == 0) {
                out.push_back(sample(i * h, y));
            }
        }
        return out;
    }

private:
    std::array<double, 2> f(const std::array<double, 2>& y) const
    {
        const double z = y[0], c = y[1];
        return {-2 * g_ * (1 + z) - 4 * (n_ - 1) * k_ * c,
                -2 * g_ * c + k_ * z * (1 + z) + 2 * (n_ - 2) * k_ * z * c};
    }

    static std::array<double, 2> add(const std::array<double, 2>& y,
                                     const std::array<double, 2>& d, double h)
    {
        return {y[0] + h * d[0], y[1] + h * d[1]};
    }

    static TwoLevelSample sample(double t, const std::array<double, 2>& y)
    {
        return {t, (1 + y[0]) / 2, y[1]};
    }

    double n_, g_, k_;
};

} // namespace oracle
