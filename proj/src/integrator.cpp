#include "superlambda/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace superlambda {

std::vector<Peak> find_peaks(std::span<const double> times,
                             std::span<const double> values,
                             double floor_fraction)
{
    if (times.size() != values.size()) {
        throw ConfigError("find_peaks: times and values differ in length");
    }
    std::vector<Peak> peaks;
    const std::size_t n = values.size();
    if (n < 3) {
        return peaks;
    }
    double scale = 0.0;
    for (double v : values) {
        scale = std::max(scale, std::abs(v));
    }
    if (scale == 0.0) {
        return peaks;
    }
    const double floor = floor_fraction * scale;

    std::size_t i = 1;
    while (i + 1 < n) {
        if (!(values[i] > values[i - 1])) {
            ++i;
            continue;
        }
        // Walk across a flat top.
        std::size_t j = i;
        while (j + 1 < n && values[j + 1] == values[i]) {
            ++j;
        }
        if (j + 1 >= n || !(values[j + 1] < values[i])) {
            i = j + 1;
            continue;
        }
        const double v = values[i];
        double left_min = v;
        for (std::size_t k = i; k-- > 0;) {
            if (values[k] > v) {
                break;
            }
            left_min = std::min(left_min, values[k]);
        }
        double right_min = v;
        for (std::size_t k = j + 1; k < n; ++k) {
            if (values[k] > v) {
                break;
            }
            right_min = std::min(right_min, values[k]);
        }
        const double prominence = v - std::max(left_min, right_min);
        if (prominence > floor) {
            const std::size_t mid = (i + j) / 2;
            peaks.push_back({mid, times[mid], v, prominence});
        }
        i = j + 1;
    }
    return peaks;
}

} // namespace superlambda
