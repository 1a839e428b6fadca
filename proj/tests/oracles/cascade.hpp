#pragma once

#include <cmath>

namespace oracle {

// Two atoms, one channel, equal pair and single rates g, both excited.
// |ee> leaves at 4g into the symmetric state, which leaves at 4g to |gg>.
inline double cascade_excited_probability(double g, double t)
{
    return std::exp(-4 * g * t);
}

inline double cascade_symmetric_probability(double g, double t)
{
    return 4 * g * t * std::exp(-4 * g * t);
}

/// <sum_j S33^(j)> = 2 P_ee + P_s.
inline double cascade_upper_population(double g, double t)
{
    return 2 * cascade_excited_probability(g, t) +
           cascade_symmetric_probability(g, t);
}

} // namespace oracle
