#pragma once

// Synthetic XCT-like layers: a bright disc on a dark background with
// darker circular pores, plus known ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/image.hpp"
#include "promptpore/random.hpp"

namespace promptpore {

struct SyntheticSpec {
    int side = 256;
    double disc_radius_fraction = 0.45;  // disc radius as a fraction of the side
    int background = 10;
    int solid = 200;
    int pore = 90;
    int pore_count = 10;         // exact count, or the Poisson mean when poisson_count is set
    bool poisson_count = false;
    int pore_radius_min = 3;
    int pore_radius_max = 8;
    bool allow_overlap = false;
    int min_gap = 3;             // pixels between non-overlapping pores
    double trapped_probability = 0.0;  // chance a pore holds a solid speckle at its center
    int trapped_intensity = 200;
    double gaussian_sigma = 0.0;
    double salt_pepper_rate = 0.0;
    std::uint64_t seed = 0;
    int max_retries = 2000;  // placement attempts per pore

    void validate() const
    {
        if (side < 8) throw ArgumentError("synthetic side must be at least 8");
        if (!(disc_radius_fraction > 0.0 && disc_radius_fraction <= 0.5))
            throw ArgumentError("disc radius fraction must lie in (0, 0.5]");
        for (int v : {background, solid, pore, trapped_intensity})
            if (v < 0 || v > 255) throw ArgumentError("intensities must lie in [0, 255]");
        if (!(background < pore && pore < solid))
            throw ArgumentError("intensities must satisfy background < pore < solid");
        if (pore_count < 0) throw ArgumentError("pore count must be non-negative");
        if (pore_radius_min < 1 || pore_radius_max < pore_radius_min)
            throw ArgumentError("pore radii must satisfy 1 <= min <= max");
        if (min_gap < 0) throw ArgumentError("pore gap must be non-negative");
        if (!(trapped_probability >= 0.0 && trapped_probability <= 1.0))
            throw ArgumentError("trapped-particle probability must lie in [0, 1]");
        if (!(gaussian_sigma >= 0.0)) throw ArgumentError("noise sigma must be non-negative");
        if (!(salt_pepper_rate >= 0.0 && salt_pepper_rate <= 1.0))
            throw ArgumentError("salt-and-pepper rate must lie in [0, 1]");
    }
};

struct SyntheticLayer {
    GrayImage image;
    BinaryMask gt;   // pore pixels
    BinaryMask roi;  // the disc
};

struct Pore {
    Point center;
    int radius = 1;
};

/// Pore footprint: offsets with dx^2 + dy^2 <= r^2 + r. This digital disc is
/// unchanged by a 3x3 median for nearly every radius.
inline bool in_pore(int dx, int dy, int r) noexcept { return dx * dx + dy * dy <= r * r + r; }

inline SyntheticLayer generate(const SyntheticSpec& spec)
{
    spec.validate();
    Engine eng = make_engine(spec.seed);
    const int n = spec.side;
    const double c = (n - 1) / 2.0;
    const double R = spec.disc_radius_fraction * n;

    BinaryMask roi(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if ((x - c) * (x - c) + (y - c) * (y - c) <= R * R) roi.set(x, y, 1);

    const int count = spec.poisson_count ? poisson(eng, spec.pore_count) : spec.pore_count;
    std::vector<Pore> pores;
    for (int k = 0; k < count; ++k) {
        const int span = spec.pore_radius_max - spec.pore_radius_min + 1;
        const int r = spec.pore_radius_min + static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(span)));
        const double extent = std::sqrt(static_cast<double>(r) * r + r);
        const double reach = R - extent - 1.5;
        bool placed = false;
        for (int attempt = 0; attempt < spec.max_retries && !placed && reach > 0.0; ++attempt) {
            const int x = static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(n)));
            const int y = static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(n)));
            if (std::hypot(x - c, y - c) > reach) continue;
            bool clear = true;
            if (!spec.allow_overlap)
                for (const auto& p : pores) {
                    const double other = std::sqrt(static_cast<double>(p.radius) * p.radius + p.radius);
                    if (std::hypot(x - p.center.x, y - p.center.y) < extent + other + spec.min_gap + 1.0) {
                        clear = false;
                        break;
                    }
                }
            if (!clear) continue;
            pores.push_back({{x, y}, r});
            placed = true;
        }
        if (!placed)
            throw GenerationError("could not place pore " + std::to_string(k + 1) + " of " + std::to_string(count) +
                                  " (radius " + std::to_string(r) + ") after " + std::to_string(spec.max_retries) +
                                  " attempts");
    }

    std::vector<std::uint8_t> px(static_cast<std::size_t>(n) * n, static_cast<std::uint8_t>(spec.background));
    BinaryMask gt(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (roi(x, y)) px[static_cast<std::size_t>(y) * n + x] = static_cast<std::uint8_t>(spec.solid);
    for (const auto& p : pores)
        for (int dy = -p.radius; dy <= p.radius; ++dy)
            for (int dx = -p.radius; dx <= p.radius; ++dx) {
                const int x = p.center.x + dx;
                const int y = p.center.y + dy;
                if (!in_pore(dx, dy, p.radius) || !roi.contains(x, y)) continue;
                px[static_cast<std::size_t>(y) * n + x] = static_cast<std::uint8_t>(spec.pore);
                gt.set(x, y, 1);
            }
    for (const auto& p : pores)
        if (spec.trapped_probability > 0.0 && uniform_real(eng) < spec.trapped_probability) {
            px[static_cast<std::size_t>(p.center.y) * n + p.center.x] = static_cast<std::uint8_t>(spec.trapped_intensity);
            gt.set(p.center.x, p.center.y, 0);
        }

    if (spec.gaussian_sigma > 0.0)
        for (auto& v : px)
            v = static_cast<std::uint8_t>(
                std::clamp(std::lround(v + spec.gaussian_sigma * standard_normal(eng)), 0L, 255L));
    if (spec.salt_pepper_rate > 0.0)
        for (auto& v : px) {
            if (uniform_real(eng) < spec.salt_pepper_rate) v = uniform_real(eng) < 0.5 ? 0 : 255;
        }

    return {GrayImage(n, n, std::move(px)), std::move(gt), std::move(roi)};
}

enum class Drift { none, reshuffle };

inline Drift parse_drift(std::string_view s)
{
    if (s == "none") return Drift::none;
    if (s == "reshuffle") return Drift::reshuffle;
    throw ArgumentError("unknown drift policy '" + std::string(s) + "'");
}

/// Layers share the spec. With reshuffle, layer i is generated from
/// derive_seed(seed, i): same morphology statistics, new pore positions.
inline std::vector<SyntheticLayer> generate_stack(const SyntheticSpec& spec, int layers, Drift drift = Drift::reshuffle)
{
    if (layers < 0) throw ArgumentError("layer count must be non-negative");
    std::vector<SyntheticLayer> out;
    out.reserve(static_cast<std::size_t>(layers));
    for (int i = 0; i < layers; ++i) {
        SyntheticSpec s = spec;
        if (drift == Drift::reshuffle) s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
        if (drift == Drift::none && i > 0) {
            out.push_back(out.front());
            continue;
        }
        out.push_back(generate(s));
    }
    return out;
}

inline nlohmann::json to_json(const SyntheticSpec& s)
{
    return {{"side", s.side},
            {"disc_radius_fraction", s.disc_radius_fraction},
            {"background", s.background},
            {"solid", s.solid},
            {"pore", s.pore},
            {"pore_count", s.pore_count},
            {"poisson_count", s.poisson_count},
            {"pore_radius_min", s.pore_radius_min},
            {"pore_radius_max", s.pore_radius_max},
            {"allow_overlap", s.allow_overlap},
            {"min_gap", s.min_gap},
            {"trapped_probability", s.trapped_probability},
            {"trapped_intensity", s.trapped_intensity},
            {"gaussian_sigma", s.gaussian_sigma},
            {"salt_pepper_rate", s.salt_pepper_rate},
            {"seed", s.seed}};
}

}  // namespace promptpore
