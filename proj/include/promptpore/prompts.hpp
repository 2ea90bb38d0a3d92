#pragma once

// Point prompts drawn from a centroid's foreground pool.
//
// Draws use promptpore::Engine (std::mt19937_64) and uniform_index, so a
// given (pool, m, seed) produces the same points everywhere.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "promptpore/centroid_store.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/log.hpp"
#include "promptpore/prompt_set.hpp"
#include "promptpore/random.hpp"

namespace promptpore {

inline constexpr std::size_t kDefaultPromptSize = 10'000;
inline constexpr std::size_t kSparsePromptSize = 1'000;
inline constexpr std::size_t kDefaultBootstrapIterations = 100;

namespace detail {
inline void require_pool(const CentroidRecord& record)
{
    if (!record.usable()) throw UnusableRecordError(record.id() + " has an empty foreground pool");
}
}  // namespace detail

/// m distinct pool points, uniformly without replacement (partial
/// Fisher-Yates). When m exceeds the pool, the whole pool is returned.
inline PromptSet generate_prompts(const CentroidRecord& record, std::size_t m, std::uint64_t seed)
{
    detail::require_pool(record);
    if (m < 1) throw ArgumentError("prompt size must be at least 1");
    const auto& pool = record.foreground_pool;
    PromptSet out;
    out.source = record.id();
    out.seed = seed;
    if (m >= pool.size()) {
        if (m > pool.size())
            warn(record.id() + ": prompt size " + std::to_string(m) + " exceeds pool size " +
                 std::to_string(pool.size()) + "; using the whole pool");
        out.points = pool;
    } else {
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Engine eng = make_engine(seed);
        out.points.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_index(eng, idx.size() - i));
            std::swap(idx[i], idx[j]);
            out.points.push_back(pool[idx[i]]);
        }
    }
    out.labels.assign(out.points.size(), 1);
    return out;
}

/// Bootstrap draw `iteration`: m pool points with replacement, seeded by
/// derive_seed(seed, iteration).
inline PromptSet bootstrap_prompt(const CentroidRecord& record, std::size_t m, std::uint64_t seed,
                                  std::size_t iteration)
{
    detail::require_pool(record);
    if (m < 1) throw ArgumentError("prompt size must be at least 1");
    PromptSet out;
    out.source = record.id();
    out.seed = derive_seed(seed, iteration);
    Engine eng = make_engine(out.seed);
    const auto& pool = record.foreground_pool;
    out.points.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.points.push_back(pool[uniform_index(eng, pool.size())]);
    out.labels.assign(m, 1);
    return out;
}

/// B independent with-replacement draws (m out of n bootstrap).
inline std::vector<PromptSet> bootstrap_prompts(const CentroidRecord& record, std::size_t m,
                                                std::size_t B = kDefaultBootstrapIterations, std::uint64_t seed = 0)
{
    detail::require_pool(record);
    if (B < 1) throw ArgumentError("bootstrap iterations must be at least 1");
    std::vector<PromptSet> out;
    out.reserve(B);
    for (std::size_t i = 0; i < B; ++i) out.push_back(bootstrap_prompt(record, m, seed, i));
    return out;
}

}  // namespace promptpore
