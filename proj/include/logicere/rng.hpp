#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace logicere {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives an independent stream key from a parent key and a counter.
inline constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t counter) {
    return splitmix64(key ^ splitmix64(counter + 0x632BE59BD9B4E019ull));
}

template <typename... Ts>
inline constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t c, Ts... rest) {
    return derive_key(derive_key(key, c), static_cast<std::uint64_t>(rest)...);
}

/// Uniform double in [0, 1) that is a pure function of (key, counter).
inline double counter_uniform(std::uint64_t key, std::uint64_t counter) {
    return static_cast<double>(derive_key(key, counter) >> 11) * 0x1.0p-53;
}

/// Engine seeded from a derived key, for sequential sampling within one stream.
inline std::mt19937_64 make_engine(std::uint64_t key) { return std::mt19937_64(splitmix64(key)); }

/// Uniform real in [lo, hi) from an engine. Avoids std::uniform_real_distribution so
/// streams are identical across standard library implementations.
inline double uniform(std::mt19937_64& eng, double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (static_cast<double>(eng() >> 11) * 0x1.0p-53);
}

/// Uniform integer in [lo, hi].
inline std::int64_t uniform_int(std::mt19937_64& eng, std::int64_t lo, std::int64_t hi) {
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(eng() % span);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Standard normal via Box-Muller.
double standard_normal(std::mt19937_64& eng);

}  // namespace logicere
