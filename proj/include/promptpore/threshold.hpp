#pragma once

// Reference-mask generation: median denoising, three-level intensity
// k-means, then the two-pass binarization at the middle centroid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "promptpore/errors.hpp"
#include "promptpore/image.hpp"

namespace promptpore {

using Histogram = std::array<std::uint64_t, 256>;

inline Histogram histogram(const GrayImage& img)
{
    Histogram h{};
    for (auto v : img.data()) ++h[v];
    return h;
}

struct IntensityCentroids {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;

    /// Binarization threshold T.
    double threshold() const noexcept { return c2; }
    friend bool operator==(const IntensityCentroids&, const IntensityCentroids&) = default;
};

struct IntensityClustering {
    std::vector<double> centroids;        // ascending
    std::vector<double> objective_trace;  // within-cluster sum of squares after each update
    double objective = 0.0;
    int iterations = 0;
};

/// Sum over pixels of the squared distance to the nearest centroid.
inline double intensity_objective(const Histogram& h, const std::vector<double>& centroids)
{
    double total = 0.0;
    for (int v = 0; v < 256; ++v) {
        if (!h[v]) continue;
        double best = std::numeric_limits<double>::infinity();
        for (double c : centroids) best = std::min(best, (v - c) * (v - c));
        total += static_cast<double>(h[v]) * best;
    }
    return total;
}

namespace detail {

struct Level {
    int value;
    double count;
};

inline std::vector<Level> occupied_levels(const Histogram& h)
{
    std::vector<Level> out;
    for (int v = 0; v < 256; ++v)
        if (h[v]) out.push_back({v, static_cast<double>(h[v])});
    return out;
}

/// Globally optimal 1-D k-means over contiguous runs of sorted levels.
inline std::vector<double> optimal_intensity_centroids(const std::vector<Level>& levels, int k)
{
    const std::size_t n = levels.size();
    std::vector<double> cn(n + 1, 0.0), cs(n + 1, 0.0), css(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cn[i + 1] = cn[i] + levels[i].count;
        cs[i + 1] = cs[i] + levels[i].count * levels[i].value;
        css[i + 1] = css[i] + levels[i].count * levels[i].value * levels[i].value;
    }
    // sse of levels [i, j)
    auto sse = [&](std::size_t i, std::size_t j) {
        const double cnt = cn[j] - cn[i];
        const double s = cs[j] - cs[i];
        return std::max(0.0, (css[j] - css[i]) - s * s / cnt);
    };
    const double inf = std::numeric_limits<double>::infinity();
    const auto K = static_cast<std::size_t>(k);
    std::vector<std::vector<double>> cost(K + 1, std::vector<double>(n + 1, inf));
    std::vector<std::vector<std::size_t>> split(K + 1, std::vector<std::size_t>(n + 1, 0));
    cost[0][0] = 0.0;
    for (std::size_t c = 1; c <= K; ++c)
        for (std::size_t j = c; j <= n; ++j)
            for (std::size_t i = c - 1; i < j; ++i) {
                const double v = cost[c - 1][i] + sse(i, j);
                if (v < cost[c][j]) {
                    cost[c][j] = v;
                    split[c][j] = i;
                }
            }
    std::vector<double> centroids(K);
    std::size_t j = n;
    for (std::size_t c = K; c >= 1; --c) {
        const std::size_t i = split[c][j];
        centroids[c - 1] = (cs[j] - cs[i]) / (cn[j] - cn[i]);
        j = i;
    }
    return centroids;
}

}  // namespace detail

/// Lloyd iteration on the intensity histogram.
///
/// Centroids start at the (2j+1)/(2k) pixel quantiles. A cluster that empties
/// is moved onto the level farthest from its current centroid. Iteration stops
/// once no centroid moves by `tol` or more, or after `max_iter` updates. Since
/// Lloyd can stall in a local optimum, the result is finally compared against
/// the exact optimum over contiguous level runs and replaced if that is
/// strictly better.
inline IntensityClustering cluster_intensities(const Histogram& h, int k, int max_iter = 100, double tol = 0.5)
{
    if (k < 1) throw ArgumentError("cluster count must be positive");
    if (max_iter < 1) throw ArgumentError("max_iter must be positive");
    const auto levels = detail::occupied_levels(h);
    if (levels.size() < static_cast<std::size_t>(k))
        throw DegenerateInputError("intensity clustering needs at least " + std::to_string(k) +
                                   " distinct intensities, found " + std::to_string(levels.size()));

    double total = 0.0;
    for (const auto& l : levels) total += l.count;

    IntensityClustering result;
    std::vector<double> centroids(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const double target = total * (2.0 * j + 1.0) / (2.0 * k);
        double cum = 0.0;
        for (const auto& l : levels) {
            cum += l.count;
            if (cum >= target) {
                centroids[static_cast<std::size_t>(j)] = l.value;
                break;
            }
        }
    }

    std::vector<std::size_t> assign(levels.size());
    auto assign_all = [&] {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            std::size_t best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < centroids.size(); ++c) {
                const double d = std::abs(levels[i].value - centroids[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        assign_all();
        for (int guard = 0; guard < k; ++guard) {
            std::vector<double> members(centroids.size(), 0.0);
            for (std::size_t i = 0; i < levels.size(); ++i) members[assign[i]] += 1.0;
            const auto empty = std::find(members.begin(), members.end(), 0.0);
            if (empty == members.end()) break;
            std::size_t far = 0;
            double fd = -1.0;
            for (std::size_t i = 0; i < levels.size(); ++i) {
                if (members[assign[i]] < 2.0) continue;
                const double d = std::abs(levels[i].value - centroids[assign[i]]);
                if (d > fd) {
                    fd = d;
                    far = i;
                }
            }
            centroids[static_cast<std::size_t>(empty - members.begin())] = levels[far].value;
            assign_all();
        }

        std::vector<double> sum(centroids.size(), 0.0), cnt(centroids.size(), 0.0);
        for (std::size_t i = 0; i < levels.size(); ++i) {
            sum[assign[i]] += levels[i].count * levels[i].value;
            cnt[assign[i]] += levels[i].count;
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double next = cnt[c] > 0 ? sum[c] / cnt[c] : centroids[c];
            shift = std::max(shift, std::abs(next - centroids[c]));
            centroids[c] = next;
        }
        std::sort(centroids.begin(), centroids.end());
        result.objective_trace.push_back(intensity_objective(h, centroids));
        result.iterations = iter + 1;
        if (shift < tol) break;
    }

    result.objective = intensity_objective(h, centroids);
    auto optimal = detail::optimal_intensity_centroids(levels, k);
    const double opt_obj = intensity_objective(h, optimal);
    if (opt_obj < result.objective - 1e-9 * std::max(1.0, result.objective)) {
        centroids = std::move(optimal);
        result.objective = opt_obj;
        result.objective_trace.push_back(opt_obj);
    }
    result.centroids = std::move(centroids);
    return result;
}

/// Three-level intensity clustering of an image.
inline IntensityCentroids pixel_kmeans(const GrayImage& img, int max_iter = 100, double tol = 0.5)
{
    const auto r = cluster_intensities(histogram(img), 3, max_iter, tol);
    return {r.centroids[0], r.centroids[1], r.centroids[2]};
}

struct ThresholdOptions {
    int filter_k = 3;
    /// Pixels at or below this intensity never become foreground. 0 keeps the
    /// plain two-pass rule, where every nonzero pixel at or below T is foreground.
    int background_floor = 0;
    /// When set, pixels outside the region are background.
    std::optional<BinaryMask> roi;
};

/// Two-pass binarization: pixels above T are cleared, then every remaining
/// pixel above the background floor becomes foreground.
inline BinaryMask binarize(const GrayImage& img, double T, int background_floor = 0,
                           const std::optional<BinaryMask>& roi = std::nullopt)
{
    if (!(T >= 0.0 && T <= 255.0)) throw ArgumentError("threshold must lie in [0, 255]");
    if (background_floor < 0 || background_floor > 255) throw ArgumentError("background floor must lie in [0, 255]");
    if (roi && !roi->same_shape(img)) throw ArgumentError("region-of-interest dimensions differ from the image");
    std::vector<std::uint8_t> out(img.size(), 0);
    const auto px = img.data();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const std::uint8_t p = px[i] > T ? std::uint8_t{0} : px[i];
        out[i] = p > background_floor ? 1 : 0;
    }
    if (roi)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] &= roi->data()[i];
    return BinaryMask(img.width(), img.height(), std::move(out));
}

struct ReferenceMask {
    BinaryMask mask;
    IntensityCentroids centroids;
};

/// Median filter, three-level clustering, binarize at the middle centroid.
inline ReferenceMask build_reference_mask(const GrayImage& img, const ThresholdOptions& opts = {})
{
    const GrayImage filtered = median_filter(img, opts.filter_k);
    const IntensityCentroids c = pixel_kmeans(filtered);
    return {binarize(filtered, c.threshold(), opts.background_floor, opts.roi), c};
}

inline BinaryMask make_reference_mask(const GrayImage& img, const ThresholdOptions& opts = {})
{
    return build_reference_mask(img, opts).mask;
}

}  // namespace promptpore
