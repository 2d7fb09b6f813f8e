#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace locallearn {

using Rng = std::mt19937_64;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and a path of integer tags, so that
/// every component gets an independent stream regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = mix64(master);
    for (auto t : tags) s = mix64(s ^ mix64(t + 0x632be59bd9b4e019ULL));
    return s;
}

// Stream tags used with derive_seed.
namespace seed_tag {
inline constexpr std::uint64_t folds = 1;
inline constexpr std::uint64_t gap = 2;
inline constexpr std::uint64_t kmeans = 3;
inline constexpr std::uint64_t cluster = 4;
inline constexpr std::uint64_t tune_split = 5;
inline constexpr std::uint64_t de = 6;
inline constexpr std::uint64_t bootstrap = 7;
inline constexpr std::uint64_t synth = 8;
inline constexpr std::uint64_t split = 9;
}  // namespace seed_tag

/// Uniform double in [0,1) from the engine's raw output; identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do { r = rng(); } while (r >= limit);
    return r % n;
}

template <typename It>
void shuffle(It first, It last, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_index(rng, i);
        std::swap(first[i - 1], first[j]);
    }
}

}  // namespace locallearn
