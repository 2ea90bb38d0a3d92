#pragma once

// Clustering of whole layer images: k-means (squared Euclidean objective)
// and k-medoids (PAM swaps) with Euclidean or DTW distance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "promptpore/distance.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/image.hpp"
#include "promptpore/random.hpp"

namespace promptpore {

/// Row-major image flattened to reals.
struct ImageVector {
    std::vector<double> values;
    std::string source_id;
    int width = 0;
    int height = 0;

    std::size_t size() const noexcept { return values.size(); }
};

inline ImageVector to_image_vector(const GrayImage& img, std::string source_id)
{
    ImageVector v;
    v.values.assign(img.data().begin(), img.data().end());
    v.source_id = std::move(source_id);
    v.width = img.width();
    v.height = img.height();
    return v;
}

/// Round half up into 8-bit, clamping to [0, 255].
inline GrayImage to_gray_image(const ImageVector& v)
{
    std::vector<std::uint8_t> px(v.values.size());
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<std::uint8_t>(std::clamp(std::floor(v.values[i] + 0.5), 0.0, 255.0));
    return GrayImage(v.width, v.height, std::move(px));
}

/// Box-average so the longest side is at most `side`. Smaller images pass through.
inline ImageVector downsample(const ImageVector& v, int side)
{
    const int longest = std::max(v.width, v.height);
    if (side <= 0 || longest <= side) return v;
    const int tw = std::max(1, static_cast<int>(std::lround(static_cast<double>(v.width) * side / longest)));
    const int th = std::max(1, static_cast<int>(std::lround(static_cast<double>(v.height) * side / longest)));
    ImageVector out;
    out.source_id = v.source_id;
    out.width = tw;
    out.height = th;
    out.values.resize(static_cast<std::size_t>(tw) * static_cast<std::size_t>(th));
    for (int ty = 0; ty < th; ++ty) {
        const int y0 = ty * v.height / th;
        const int y1 = std::max(y0 + 1, (ty + 1) * v.height / th);
        for (int tx = 0; tx < tw; ++tx) {
            const int x0 = tx * v.width / tw;
            const int x1 = std::max(x0 + 1, (tx + 1) * v.width / tw);
            double s = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    s += v.values[static_cast<std::size_t>(y) * static_cast<std::size_t>(v.width) +
                                  static_cast<std::size_t>(x)];
            out.values[static_cast<std::size_t>(ty) * static_cast<std::size_t>(tw) + static_cast<std::size_t>(tx)] =
                s / ((y1 - y0) * (x1 - x0));
        }
    }
    return out;
}

enum class ClusterMethod { kmeans, kmedoids };
enum class DistanceKind { euclidean, dtw };

inline std::string_view to_string(ClusterMethod m) { return m == ClusterMethod::kmeans ? "kmeans" : "kmedoids"; }
inline std::string_view to_string(DistanceKind d) { return d == DistanceKind::euclidean ? "euclidean" : "dtw"; }

inline ClusterMethod parse_cluster_method(std::string_view s)
{
    if (s == "kmeans") return ClusterMethod::kmeans;
    if (s == "kmedoids") return ClusterMethod::kmedoids;
    throw ArgumentError("unknown clustering method '" + std::string(s) + "'");
}

inline DistanceKind parse_distance_kind(std::string_view s)
{
    if (s == "euclidean") return DistanceKind::euclidean;
    if (s == "dtw") return DistanceKind::dtw;
    throw ArgumentError("unknown distance '" + std::string(s) + "'");
}

/// How images are turned into DTW sequences.
struct DtwOptions {
    int downsample_side = 64;                  // <= 0 keeps full resolution
    std::optional<double> band_fraction = 0.1;  // radius as a fraction of length; nullopt = unconstrained
};

struct ClusterModel {
    ClusterMethod method = ClusterMethod::kmeans;
    DistanceKind distance = DistanceKind::euclidean;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> image_ids;
    std::vector<std::size_t> assignments;    // parallel to image_ids
    std::vector<ImageVector> centroids;      // means (kmeans) or member images (kmedoids)
    std::vector<std::size_t> medoid_indices;  // kmedoids only
    double objective = 0.0;
    std::vector<double> objective_trace;  // kmeans: per Lloyd iteration; kmedoids: per accepted swap
    int iterations = 0;

    std::vector<std::size_t> members(std::size_t cluster) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] == cluster) out.push_back(i);
        return out;
    }

    std::vector<std::size_t> cluster_sizes() const
    {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (auto a : assignments) ++sizes[a];
        return sizes;
    }
};

namespace detail {

inline void check_cluster_inputs(const std::vector<ImageVector>& images, int k)
{
    if (k < 1) throw ArgumentError("cluster count must be positive");
    if (images.size() < static_cast<std::size_t>(k))
        throw ArgumentError("need at least " + std::to_string(k) + " images to form " + std::to_string(k) +
                            " clusters, got " + std::to_string(images.size()));
    for (const auto& im : images)
        if (im.size() != images.front().size())
            throw ArgumentError("image '" + im.source_id + "' has " + std::to_string(im.size()) +
                                " values, expected " + std::to_string(images.front().size()));
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/// Run `fn(i)` for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
}

struct LloydRun {
    std::vector<std::size_t> assignments;
    std::vector<std::vector<double>> centroids;
    std::vector<double> trace;
    double objective = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

/// Lloyd iterations from the given starting centroids, then Hartigan refinement.
inline LloydRun lloyd_from(const std::vector<ImageVector>& images, std::vector<std::vector<double>> centroids,
                           int max_iter, double tol)
{
    const std::size_t n = images.size();
    const std::size_t k = centroids.size();
    LloydRun run;
    run.assignments.assign(n, 0);
    std::vector<double> dist(n, 0.0);
    auto assign = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = squared_distance(images[i].values, centroids[c]);
                if (d < best) {
                    best = d;
                    run.assignments[i] = c;
                }
            }
            dist[i] = best;
        }
    };

    const std::size_t dim = images.front().size();
    for (int iter = 0; iter < max_iter; ++iter) {
        assign();
        // repair empty clusters with the point farthest from its centroid
        for (std::size_t guard = 0; guard < k; ++guard) {
            std::vector<std::size_t> sizes(k, 0);
            for (auto a : run.assignments) ++sizes[a];
            const auto empty = std::find(sizes.begin(), sizes.end(), std::size_t{0});
            if (empty == sizes.end()) break;
            std::size_t far = 0;
            double fd = -1.0;
            for (std::size_t i = 0; i < n; ++i)
                if (sizes[run.assignments[i]] > 1 && dist[i] > fd) {
                    fd = dist[i];
                    far = i;
                }
            const auto e = static_cast<std::size_t>(empty - sizes.begin());
            centroids[e] = images[far].values;
            run.assignments[far] = e;
            dist[far] = 0.0;
        }

        std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
        std::vector<double> counts(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& acc = next[run.assignments[i]];
            for (std::size_t d = 0; d < dim; ++d) acc[d] += images[i].values[d];
            counts[run.assignments[i]] += 1.0;
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            for (auto& x : next[c]) x /= counts[c];
            shift = std::max(shift, std::sqrt(squared_distance(next[c], centroids[c])));
        }
        centroids = std::move(next);

        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += squared_distance(images[i].values, centroids[run.assignments[i]]);
        run.trace.push_back(obj);
        run.iterations = iter + 1;
        if (shift <= tol) break;
    }
    // Hartigan refinement: move single points between clusters while that
    // strictly lowers the objective. Every such fixed point is also a Lloyd
    // fixed point, but not the reverse.
    std::vector<double> counts(k, 0.0);
    for (auto a : run.assignments) counts[a] += 1.0;
    for (int pass = 0; pass < max_iter; ++pass) {
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t from = run.assignments[i];
            if (counts[from] < 2.0) continue;
            const double leave =
                counts[from] / (counts[from] - 1.0) * squared_distance(images[i].values, centroids[from]);
            std::size_t to = from;
            double best_gain = 1e-12 * std::max(1.0, run.trace.back());
            for (std::size_t c = 0; c < k; ++c) {
                if (c == from) continue;
                const double join = counts[c] / (counts[c] + 1.0) * squared_distance(images[i].values, centroids[c]);
                if (leave - join > best_gain) {
                    best_gain = leave - join;
                    to = c;
                }
            }
            if (to == from) continue;
            for (std::size_t d = 0; d < dim; ++d) {
                const double x = images[i].values[d];
                centroids[from][d] = (centroids[from][d] * counts[from] - x) / (counts[from] - 1.0);
                centroids[to][d] = (centroids[to][d] * counts[to] + x) / (counts[to] + 1.0);
            }
            counts[from] -= 1.0;
            counts[to] += 1.0;
            run.assignments[i] = to;
            moved = true;
        }
        if (!moved) break;
        // recompute exactly to avoid drift from the incremental updates
        std::vector<std::vector<double>> exact(k, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < dim; ++d) exact[run.assignments[i]][d] += images[i].values[d];
        for (std::size_t c = 0; c < k; ++c)
            for (auto& x : exact[c]) x /= counts[c];
        centroids = std::move(exact);
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += squared_distance(images[i].values, centroids[run.assignments[i]]);
        run.trace.push_back(obj);
        ++run.iterations;
    }

    run.objective = run.trace.back();
    run.centroids = std::move(centroids);
    return run;
}

inline LloydRun lloyd_run(const std::vector<ImageVector>& images, std::size_t k, std::uint64_t seed, int max_iter,
                          double tol)
{
    const std::size_t n = images.size();
    Engine eng = make_engine(seed);

    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    centroids.push_back(images[uniform_index(eng, n)].values);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(images[i].values, centroids.back()));
            total += nearest[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = uniform_real(eng) * total;
            double cum = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += nearest[i];
                if (cum > target && nearest[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(images[pick].values);
    }
    return lloyd_from(images, std::move(centroids), max_iter, tol);
}

}  // namespace detail

struct KMeansOptions {
    int k = 3;
    std::uint64_t seed = 0;
    int max_iter = 100;
    double tol = 1e-9;  // stop when no centroid moves farther than this
    int restarts = 10;  // independent seeded k-means++ starts; the lowest objective wins
    /// When the number of k-subsets of the images is at most this, every
    /// subset is also tried as a starting set. 0 disables.
    std::size_t subset_start_limit = 512;
};

/// Lloyd k-means with k-means++ seeding. The objective is the total squared
/// Euclidean distance of each image to its cluster mean.
inline ClusterModel kmeans_images(const std::vector<ImageVector>& images, const KMeansOptions& opts = {})
{
    detail::check_cluster_inputs(images, opts.k);
    if (opts.restarts < 1 || opts.max_iter < 1) throw ArgumentError("restarts and max_iter must be positive");
    const auto k = static_cast<std::size_t>(opts.k);

    detail::LloydRun best;
    for (int r = 0; r < opts.restarts; ++r) {
        auto run = detail::lloyd_run(images, k, derive_seed(opts.seed, static_cast<std::uint64_t>(r)), opts.max_iter,
                                     opts.tol);
        if (run.objective < best.objective) best = std::move(run);
    }
    const std::size_t n = images.size();
    std::size_t subsets = 1;
    for (std::size_t i = 0; i < k && subsets <= opts.subset_start_limit; ++i) subsets = subsets * (n - i) / (i + 1);
    if (subsets <= opts.subset_start_limit) {
        std::vector<char> pick(n, 0);
        std::fill(pick.end() - static_cast<std::ptrdiff_t>(k), pick.end(), 1);
        do {
            std::vector<std::vector<double>> start;
            for (std::size_t i = 0; i < n; ++i)
                if (pick[i]) start.push_back(images[i].values);
            auto run = detail::lloyd_from(images, std::move(start), opts.max_iter, opts.tol);
            if (run.objective < best.objective) best = std::move(run);
        } while (std::next_permutation(pick.begin(), pick.end()));
    }

    ClusterModel model;
    model.method = ClusterMethod::kmeans;
    model.distance = DistanceKind::euclidean;
    model.k = opts.k;
    model.seed = opts.seed;
    for (const auto& im : images) model.image_ids.push_back(im.source_id);
    model.assignments = std::move(best.assignments);
    for (std::size_t c = 0; c < k; ++c) {
        ImageVector v;
        v.values = std::move(best.centroids[c]);
        v.source_id = "mean_" + std::to_string(c);
        v.width = images.front().width;
        v.height = images.front().height;
        model.centroids.push_back(std::move(v));
    }
    model.objective = best.objective;
    model.objective_trace = std::move(best.trace);
    model.iterations = best.iterations;
    return model;
}

/// Symmetric pairwise distance matrix under the chosen metric.
inline std::vector<std::vector<double>> distance_matrix(const std::vector<ImageVector>& images, DistanceKind kind,
                                                        const DtwOptions& dtw_opts = {}, int jobs = 1)
{
    const std::size_t n = images.size();
    std::vector<ImageVector> seqs;
    if (kind == DistanceKind::dtw) {
        seqs.reserve(n);
        for (const auto& im : images) seqs.push_back(downsample(im, dtw_opts.downsample_side));
    }
    std::optional<std::size_t> band;
    if (kind == DistanceKind::dtw && dtw_opts.band_fraction && !seqs.empty())
        band = static_cast<std::size_t>(std::ceil(*dtw_opts.band_fraction * static_cast<double>(seqs.front().size())));

    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    detail::parallel_for(n, jobs, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j)
            d[i][j] = kind == DistanceKind::euclidean ? euclidean(images[i].values, images[j].values)
                                                      : dtw(seqs[i].values, seqs[j].values, band);
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[j][i] = d[i][j];
    return d;
}

struct KMedoidsOptions {
    int k = 3;
    DistanceKind distance = DistanceKind::euclidean;
    DtwOptions dtw;
    std::uint64_t seed = 0;
    int max_iter = 100;  // accepted swaps
    int restarts = 5;    // seeded first medoids; the lowest cost wins
    int jobs = 1;        // threads for the distance matrix
    /// When the number of k-subsets of the images is at most this, every
    /// subset is also tried as a starting medoid set. 0 disables.
    std::size_t subset_start_limit = 512;
};

/// Total cost of a medoid set: each point pays its distance to the nearest medoid.
inline double medoid_cost(const std::vector<std::vector<double>>& d, const std::vector<std::size_t>& medoids)
{
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (auto m : medoids) best = std::min(best, d[i][m]);
        total += best;
    }
    return total;
}

/// k-medoids over a precomputed distance matrix: greedy farthest-first BUILD
/// from a seeded first medoid, then PAM swaps accepted only when the total
/// cost strictly decreases. Small inputs also start from every k-subset.
inline ClusterModel kmedoids_from_matrix(const std::vector<ImageVector>& images,
                                         const std::vector<std::vector<double>>& d, const KMedoidsOptions& opts)
{
    detail::check_cluster_inputs(images, opts.k);
    if (opts.restarts < 1 || opts.max_iter < 0) throw ArgumentError("restarts must be positive");
    const std::size_t n = images.size();
    const auto k = static_cast<std::size_t>(opts.k);

    std::vector<std::size_t> best_medoids;
    std::vector<double> best_trace;
    double best_cost = std::numeric_limits<double>::infinity();
    int best_iters = 0;

    auto refine = [&](std::vector<std::size_t> medoids) {
        double cost = medoid_cost(d, medoids);
        std::vector<double> trace{cost};
        int iters = 0;
        while (iters < opts.max_iter) {
            double swap_cost = cost;
            std::size_t swap_slot = k, swap_with = n;
            for (std::size_t slot = 0; slot < k; ++slot)
                for (std::size_t h = 0; h < n; ++h) {
                    if (std::find(medoids.begin(), medoids.end(), h) != medoids.end()) continue;
                    auto trial = medoids;
                    trial[slot] = h;
                    const double c = medoid_cost(d, trial);
                    if (c < swap_cost) {
                        swap_cost = c;
                        swap_slot = slot;
                        swap_with = h;
                    }
                }
            if (swap_slot == k) break;
            medoids[swap_slot] = swap_with;
            cost = swap_cost;
            trace.push_back(cost);
            ++iters;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best_medoids = medoids;
            best_trace = std::move(trace);
            best_iters = iters;
        }
    };

    for (int r = 0; r < opts.restarts; ++r) {
        Engine eng = make_engine(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
        std::vector<std::size_t> medoids{static_cast<std::size_t>(uniform_index(eng, n))};
        while (medoids.size() < k) {
            std::size_t pick = 0;
            double far = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (std::find(medoids.begin(), medoids.end(), i) != medoids.end()) continue;
                double nearest = std::numeric_limits<double>::infinity();
                for (auto m : medoids) nearest = std::min(nearest, d[i][m]);
                if (nearest > far) {
                    far = nearest;
                    pick = i;
                }
            }
            medoids.push_back(pick);
        }
        refine(std::move(medoids));
    }

    std::size_t subsets = 1;
    for (std::size_t i = 0; i < k && subsets <= opts.subset_start_limit; ++i) subsets = subsets * (n - i) / (i + 1);
    if (subsets <= opts.subset_start_limit) {
        std::vector<char> pick(n, 0);
        std::fill(pick.end() - static_cast<std::ptrdiff_t>(k), pick.end(), 1);
        do {
            std::vector<std::size_t> medoids;
            for (std::size_t i = 0; i < n; ++i)
                if (pick[i]) medoids.push_back(i);
            refine(std::move(medoids));
        } while (std::next_permutation(pick.begin(), pick.end()));
    }

    ClusterModel model;
    model.method = ClusterMethod::kmedoids;
    model.distance = opts.distance;
    model.k = opts.k;
    model.seed = opts.seed;
    for (const auto& im : images) model.image_ids.push_back(im.source_id);
    model.assignments.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = std::find(best_medoids.begin(), best_medoids.end(), i);
        if (own != best_medoids.end()) {
            model.assignments[i] = static_cast<std::size_t>(own - best_medoids.begin());
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c)
            if (d[i][best_medoids[c]] < best) {
                best = d[i][best_medoids[c]];
                model.assignments[i] = c;
            }
    }
    model.medoid_indices = best_medoids;
    for (auto m : best_medoids) model.centroids.push_back(images[m]);
    model.objective = best_cost;
    model.objective_trace = std::move(best_trace);
    model.iterations = best_iters;
    return model;
}

inline ClusterModel kmedoids_images(const std::vector<ImageVector>& images, const KMedoidsOptions& opts = {})
{
    detail::check_cluster_inputs(images, opts.k);
    return kmedoids_from_matrix(images, distance_matrix(images, opts.distance, opts.dtw, opts.jobs), opts);
}

}  // namespace promptpore
