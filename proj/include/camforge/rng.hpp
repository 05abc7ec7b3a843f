#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace camforge {

// splitmix64 finalizer. Used both as a stateless counter-based generator
// (hash of a key tuple) and as the transition function of Rng below, so
// draws are reproducible across platforms and iteration orders.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t key2(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

constexpr std::uint64_t key3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return key2(key2(a, b), c);
}

// FNV-1a, for deriving seeds from string ids (prompts, scene ids).
constexpr std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Uniform double strictly inside (0,1): never returns either endpoint.
inline double unit_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Small deterministic generator. Stream position is part of the state, so
// two Rng objects seeded identically produce identical sequences.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // in [0,n)
    std::uint64_t uniform_u64(std::uint64_t n) { return next_u64() % n; }

    int uniform_int(int lo, int hi) {  // inclusive ends
        return lo + static_cast<int>(uniform_u64(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Box-Muller; consumes two draws per normal.
    double normal() {
        double u1 = unit_open(next_u64());
        double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace camforge
