#pragma once

// Portable, seedable randomness. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the standard distributions are not,
// so every draw below is derived from raw engine output with a documented
// algorithm. Identical seeds give identical draws on every platform.

#include <cmath>
#include <cstdint>
#include <random>

namespace promptpore {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` under `seed`. Streams are reproducible individually.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
    return mix_seed(mix_seed(seed) ^ mix_seed(index + 0x632BE59BD9B4E019ULL));
}

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

/// Uniform integer in [0, n) by rejection of the biased tail. Requires n > 0.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n)
{
    const std::uint64_t limit = Engine::max() - (Engine::max() % n + 1) % n;
    std::uint64_t x;
    do {
        x = eng();
    } while (x > limit);
    return x % n;
}

/// Uniform real in [0, 1) with 53 random bits.
inline double uniform_real(Engine& eng)
{
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one value per call, second discarded).
inline double standard_normal(Engine& eng)
{
    double u1;
    do {
        u1 = uniform_real(eng);
    } while (u1 <= 0.0);
    const double u2 = uniform_real(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Poisson draw by Knuth's multiplication method; fine for small means.
inline int poisson(Engine& eng, double mean)
{
    const double limit = std::exp(-mean);
    int k = 0;
    double p = uniform_real(eng);
    while (p > limit) {
        ++k;
        p *= uniform_real(eng);
    }
    return k;
}

}  // namespace promptpore
