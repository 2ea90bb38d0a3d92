#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ranges>
#include <string>
#include <vector>

#include "promptpore/errors.hpp"

namespace promptpore {

template <std::ranges::random_access_range A, std::ranges::random_access_range B>
double euclidean(const A& a, const B& b)
{
    const auto n = std::ranges::size(a);
    if (n != std::ranges::size(b))
        throw ArgumentError("euclidean distance needs equal lengths, got " + std::to_string(n) + " and " +
                            std::to_string(std::ranges::size(b)));
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

/// Dynamic time warping with steps (1,0), (0,1), (1,1), first and last
/// elements aligned, and squared pointwise cost; the result is the square
/// root of the cheapest path's cost. With `band`, cells with |i - j| > band
/// are excluded (Sakoe-Chiba); the band must be at least |len(a) - len(b)|.
template <std::ranges::random_access_range A, std::ranges::random_access_range B>
double dtw(const A& a, const B& b, std::optional<std::size_t> band = std::nullopt)
{
    const std::size_t n = std::ranges::size(a);
    const std::size_t m = std::ranges::size(b);
    if (n == 0 || m == 0) throw ArgumentError("dtw needs non-empty sequences");
    const std::size_t gap = n > m ? n - m : m - n;
    if (band && *band < gap)
        throw ArgumentError("dtw band " + std::to_string(*band) + " is narrower than the length difference " +
                            std::to_string(gap) + "; no warping path exists");
    const std::size_t r = band.value_or(std::max(n, m));
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<double> prev(m, inf), cur(m, inf);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > r ? i - r : 0;
        const std::size_t hi = std::min(m - 1, i + r);
        std::fill(cur.begin(), cur.end(), inf);
        const double ai = static_cast<double>(a[i]);
        for (std::size_t j = lo; j <= hi; ++j) {
            const double d = ai - static_cast<double>(b[j]);
            double best;
            if (i == 0 && j == 0)
                best = 0.0;
            else {
                best = inf;
                if (i > 0) best = std::min(best, prev[j]);
                if (j > 0) best = std::min(best, cur[j - 1]);
                if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
            }
            cur[j] = best + d * d;
        }
        std::swap(prev, cur);
    }
    return std::sqrt(prev[m - 1]);
}

}  // namespace promptpore
